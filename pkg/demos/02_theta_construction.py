"""
Constructing a certifying memory weight, and when that is impossible
====================================================================

Given dissipation R and delayed coupling Z, construct_theta whitens R,
measures the coupling s = ||V1^T Z V1||, and -- whenever s <= 1 -- returns
Theta = R/2 along with the whole feasible family Theta = alpha R.  The
sufficient condition s <= 1 is not necessary, and the second half of this
script shows a 2x2 pair with s > 1 that still has a certifying Theta,
found by brute-force grid search.
"""

import numpy as np

from phdelay import (
    certify_delay_ph,
    construct_theta,
    exists_certifying_theta_grid,
    is_psd,
    ph_condition_matrix,
    DelayPHSystem,
)

np.set_printoptions(precision=4, suppress=True)

# --- a well-damped 3x3 instance -------------------------------------------
rng = np.random.default_rng(7)
q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
R = q @ np.diag([1.5, 1.0, 0.6]) @ q.T
Z = rng.standard_normal((3, 3))
Z *= 0.5 * 0.6 / np.linalg.norm(Z, 2)   # keep ||Z|| below lambda_min(R)

out = construct_theta(R, Z)
print(f"coupling s            = {out.interval.sigma:.4f}")
print(f"alpha interval        = [{out.interval.lo:.4f}, {out.interval.hi:.4f}]")
print("constructed Theta = R/2:")
print(out.theta)

system = DelayPHSystem(H=np.eye(3), J=np.zeros((3, 3)), R=R, Z=Z,
                       G=np.zeros((3, 1)), tau=1.0)
cert = certify_delay_ph(system, out.theta)
print(f"verdict: {cert.verdict}, min eigenvalue {cert.min_eigenvalue:.4f}")
print()

# every alpha in the interval certifies; the endpoints are exactly tight
for alpha in (out.interval.lo, 0.5, out.interval.hi):
    lam = np.linalg.eigvalsh(ph_condition_matrix(R, Z, alpha * R))[0]
    print(f"alpha = {alpha:.4f}: min eigenvalue {lam:+.2e}")
print()

# --- beyond the sufficient condition ---------------------------------------
R2 = np.eye(2)
Z2 = np.array([[0.0, 1.0 / np.sqrt(3.0)], [2.0 / np.sqrt(3.0), 0.0]])
out2 = construct_theta(R2, Z2)
print(f"2x2 pair: s = {out2.interval.sigma:.4f} > 1, construction says no:")
print(f"  {out2.reason}")

# ...but a certificate exists anyway
explicit = np.diag([0.5, 0.25])
report = is_psd(ph_condition_matrix(R2, Z2, explicit))
print(f"explicit Theta = diag(0.5, 0.25): PSD? {report.is_psd} "
      f"(min eigenvalue {report.min_eigenvalue:.4f})")

found, theta = exists_certifying_theta_grid(R2, Z2)
print(f"grid search agrees (found = {found}):")
print(theta)
