"""
A scalar delay system and the window of valid energy weights
============================================================

The smallest interesting delay port-Hamiltonian system is

    x'(t) = -a0 x(t) - a1 x(t - tau) + u(t),   y = x,

with instantaneous dissipation a0 and delayed coupling a1.  Passivity for
*every* delay follows once we find a weight theta >= 0 for the memory term
of the energy functional

    E(t) = x(t)^2 / 2 + theta * integral of x(s)^2 over [t - tau, t]

such that the 2x2 block matrix [[a0 - theta, a1/2], [a1/2, theta]] is
positive semidefinite.  For a0 = 2, a1 = 1 the valid thetas form the
closed interval [1 - sqrt(3)/2, 1 + sqrt(3)/2], and this script walks the
certifier along the theta axis to see exactly that.
"""

import math

import numpy as np

from phdelay import DelayPHSystem, certify_delay_ph, scalar_theta_interval

system = DelayPHSystem(H=[[1.0]], J=[[0.0]], R=[[2.0]], Z=[[1.0]],
                       G=[[1.0]], tau=1.0)

# closed form first
interval = scalar_theta_interval(2.0, 1.0)
print(f"closed-form interval: [{interval.lo:.6f}, {interval.hi:.6f}]")
print(f"expected            : [{1 - math.sqrt(3) / 2:.6f},"
      f" {1 + math.sqrt(3) / 2:.6f}]")
print()

# now ask the certifier at a sweep of weights
print(" theta   verdict    min eigenvalue")
for theta in np.arange(0.0, 2.01, 0.25):
    cert = certify_delay_ph(system, [[theta]])
    print(f"  {theta:4.2f}   {cert.verdict:9s}  {cert.min_eigenvalue:+.4f}")
print()

# the verdict flips exactly at the endpoints
for theta in (interval.lo - 1e-6, interval.lo + 1e-6,
              interval.hi - 1e-6, interval.hi + 1e-6):
    cert = certify_delay_ph(system, [[theta]])
    print(f"theta = {theta:.7f} -> {cert.verdict}")
print()

# a pair with a0 < |a1| admits no weight at all: the delayed coupling
# overpowers the dissipation and the interval formula goes complex
hopeless = scalar_theta_interval(1.0, 2.0)
print(f"a0=1, a1=2 feasible? {hopeless.feasible}")
weak = DelayPHSystem(H=[[1.0]], J=[[0.0]], R=[[1.0]], Z=[[2.0]],
                     G=[[1.0]], tau=1.0)
worst = max(
    certify_delay_ph(weak, [[t]]).min_eigenvalue
    for t in np.linspace(0.0, 3.0, 121)
)
print(f"best min eigenvalue over a theta sweep: {worst:+.4f} (never >= 0)")
