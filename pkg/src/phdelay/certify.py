"""Delay-independent dissipativity certificates for delay systems.

A delay system in port-Hamiltonian form,

    H x'(t) = (J - R) x(t) - Z x(t - tau) + G u(t),    y = G^T x,

is passive with the Lyapunov-Krasovskii Hamiltonian
``(1/2) x^T H x + integral_{t-tau}^{t} x(s)^T Theta x(s) ds`` as storage
function exactly when Theta is symmetric PSD and the block condition

    [[R - Theta, Z/2],
     [Z^T / 2, Theta]]  is positive semidefinite                      (*)

holds.  This module certifies (*) for a given Theta, derives necessary
conditions any certifying Theta must satisfy, constructs a Theta from
(R, Z) alone when a whitened smallness test passes, and cross-checks the
verdict against two classical delay-passivity formulations (a Riccati-type
inequality and a block KYP test).  A brute-force grid oracle for n <= 2
decides existence of a certifying Theta independently of the construction.

Verdict semantics: CERTIFIED and REFUTED always refer to the pair
(system, Theta); a refuted pair says nothing about other Theta choices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .certificates import CERTIFIED, REFUTED, Certificate
from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    as_matrix,
    intersection_trivial,
    is_psd,
    kernel_basis,
    require_symmetric,
    spectral_norm,
    subspace_contained,
    whitening_basis,
)
from .systems import (
    DelayPHSystem,
    GeneralDelaySystem,
    SystemValidationError,
    delay_ph_to_general,
    validate,
)

__all__ = [
    "AlphaInterval",
    "ClassicalCrosscheck",
    "NecessaryConditions",
    "ScalarThetaInterval",
    "ThetaConstruction",
    "certify_delay_ph",
    "check_necessary",
    "classical_passivity_check",
    "construct_theta",
    "crosscheck_classical",
    "exists_certifying_theta_grid",
    "kyp_delay_check",
    "ph_condition_matrix",
    "scalar_theta_interval",
]

#: slack granted to the feasibility test s <= 1 of the Theta construction,
#: so exact boundary instances (e.g. feedback at the gain bound) succeed.
FEASIBILITY_SLACK = 1e-9

#: clamp for the open alpha interval (0, 1) in the Z = 0 degenerate case
ALPHA_CLAMP = 1e-9


def ph_condition_matrix(R, Z, theta) -> np.ndarray:
    """Assemble the 2n x 2n block matrix [[R - Theta, Z/2], [Z^T/2, Theta]]."""
    r = require_symmetric(R, "R")
    th = require_symmetric(theta, "theta")
    z = as_matrix(Z, "Z")
    n = r.shape[0]
    if th.shape != (n, n) or z.shape != (n, n):
        raise ValueError(
            f"shape mismatch: R {r.shape}, Z {z.shape}, theta {th.shape}"
        )
    cond = np.empty((2 * n, 2 * n))
    cond[:n, :n] = r - th
    cond[:n, n:] = 0.5 * z
    cond[n:, :n] = 0.5 * z.T
    cond[n:, n:] = th
    return cond


def certify_delay_ph(
    system: DelayPHSystem, theta=None, tol: Tolerance = DEFAULT_TOL
) -> Certificate:
    """Certify the pair (system, Theta) against the block condition (*).

    Theta resolution: the explicit argument wins, otherwise the theta
    stored on the system; ValueError when neither is present.  The system
    must validate (H spd, J antisymmetric, R symmetric); Theta must be
    symmetric.  Verdict CERTIFIED iff Theta is PSD and the condition
    matrix is PSD, each within the tolerance's slack.  A REFUTED verdict
    carries a witness direction with negative quadratic form.
    """
    violations = validate(system, tol)
    if violations:
        raise SystemValidationError(violations)
    if theta is None:
        theta = system.theta
    if theta is None:
        raise ValueError(
            "no Theta available: pass one explicitly, store it on the "
            "system, or construct one with construct_theta"
        )
    th = require_symmetric(theta, "theta")
    if th.shape != (system.n, system.n):
        raise ValueError(f"theta has shape {th.shape}, expected {(system.n,) * 2}")
    cond = ph_condition_matrix(system.R, system.Z, th)
    theta_report = is_psd(th, tol)
    if not theta_report.is_psd:
        return Certificate(
            verdict=REFUTED,
            condition_matrix=cond,
            min_eigenvalue=theta_report.min_eigenvalue,
            witness=theta_report.witness,
            theta_used=th,
            reason="theta_not_psd",
            slack=theta_report.slack,
        )
    report = is_psd(cond, tol)
    return Certificate(
        verdict=CERTIFIED if report.is_psd else REFUTED,
        condition_matrix=cond,
        min_eigenvalue=report.min_eigenvalue,
        witness=report.witness,
        theta_used=th,
        reason="" if report.is_psd else "condition_indefinite",
        slack=report.slack,
    )


@dataclass(frozen=True)
class ScalarThetaInterval:
    """Exact feasible theta-range for a scalar delay system.

    For scalar R = a0 >= 0 and Z = a1 the condition (*) holds for some
    theta exactly when a0 >= |a1|, and then for every theta in

        [a0/2 - sqrt(a0^2 - a1^2)/2,  a0/2 + sqrt(a0^2 - a1^2)/2].
    """

    feasible: bool
    lo: float = math.nan
    hi: float = math.nan


def scalar_theta_interval(alpha0: float, alpha1: float) -> ScalarThetaInterval:
    """Closed-form theta interval for the scalar system (see class docs)."""
    a0 = float(alpha0)
    a1 = float(alpha1)
    if a0 < 0.0 or a0 < abs(a1):
        return ScalarThetaInterval(False)
    half_width = 0.5 * math.sqrt(max(a0 * a0 - a1 * a1, 0.0))
    return ScalarThetaInterval(True, 0.5 * a0 - half_width, 0.5 * a0 + half_width)


@dataclass(frozen=True)
class NecessaryConditions:
    """Necessary conditions on (R, Theta, Z) for (*) to hold.

    kernel_chain         ker(R) <= ker(Theta) and ker(Theta) <= ker(Z)
    z_image_disjoint     ker(R) meets image(Z) only at 0
    theta_image_disjoint ker(R) meets image(Theta) only at 0
    """

    kernel_chain: bool
    z_image_disjoint: bool
    theta_image_disjoint: bool

    @property
    def all_hold(self) -> bool:
        return self.kernel_chain and self.z_image_disjoint and self.theta_image_disjoint


def check_necessary(R, theta, Z, tol: Tolerance = DEFAULT_TOL) -> NecessaryConditions:
    """Evaluate the necessary kernel/image conditions for (R, Theta, Z)."""
    r = require_symmetric(R, "R")
    th = require_symmetric(theta, "theta")
    z = as_matrix(Z, "Z")
    ker_r = kernel_basis(r, tol)
    ker_th = kernel_basis(th, tol)
    chain = subspace_contained(ker_r, th, tol) and subspace_contained(ker_th, z, tol)
    return NecessaryConditions(
        kernel_chain=chain,
        z_image_disjoint=intersection_trivial(ker_r, z, tol),
        theta_image_disjoint=intersection_trivial(ker_r, th, tol),
    )


@dataclass(frozen=True)
class AlphaInterval:
    """Feasible range of alpha for the one-parameter family Theta = alpha R.

    ``sigma`` is the whitened coupling norm s = ||V1^T Z V1||_2; the family
    certifies (*) exactly for alpha(1 - alpha) >= s^2 / 4, i.e. for

        alpha in [1/2 - sqrt(1 - s^2)/2, 1/2 + sqrt(1 - s^2)/2],

    clamped away from the open endpoints of (0, 1) in the s = 0 case.
    """

    sigma: float
    lo: float = math.nan
    hi: float = math.nan
    feasible: bool = False


@dataclass(frozen=True)
class ThetaConstruction:
    """Result of the Theta construction; ``success`` gates theta/interval."""

    success: bool
    theta: np.ndarray | None = None
    interval: AlphaInterval | None = None
    reason: str = ""


def construct_theta(R, Z, tol: Tolerance = DEFAULT_TOL) -> ThetaConstruction:
    """Construct a certifying Theta from the dissipation structure alone.

    Requires R symmetric PSD (ValueError otherwise).  The construction is
    sound under the kernel hypotheses

        ker(R) <= ker(Z)   and   image(Z) <= image(R),

    which make the whitened reduction exhaustive (the second condition also
    forces ker(R) and image(Z) to meet only at 0).  When they hold and the
    whitened coupling s = ||V1^T Z V1||_2 is <= 1, Theta = R/2 certifies
    (*) and the full family Theta(alpha) = alpha R is feasible on the
    returned AlphaInterval.  Failure (hypotheses violated, or s > 1) is a
    "don't know", never a refutation: a certifying Theta outside the
    alpha-family may still exist.
    """
    r = require_symmetric(R, "R")
    z = as_matrix(Z, "Z")
    if z.shape != r.shape:
        raise ValueError(f"Z has shape {z.shape}, expected {r.shape}")
    v1, _rank = whitening_basis(r, tol)  # raises when R is not PSD
    ker_r = kernel_basis(r, tol)
    if not subspace_contained(ker_r, z, tol):
        return ThetaConstruction(
            False, reason="kernel_condition: ker(R) is not contained in ker(Z)"
        )
    if not intersection_trivial(ker_r, z, tol):
        return ThetaConstruction(
            False, reason="kernel_condition: ker(R) meets image(Z)"
        )
    if not subspace_contained(ker_r, z.T, tol):
        return ThetaConstruction(
            False,
            reason="kernel_condition: image(Z) is not contained in image(R)",
        )
    sigma = spectral_norm(v1.T @ z @ v1)
    if sigma > 1.0 + FEASIBILITY_SLACK:
        return ThetaConstruction(
            False,
            interval=AlphaInterval(sigma=sigma, feasible=False),
            reason=f"sufficient_condition: whitened coupling {sigma:.12g} > 1",
        )
    half_width = 0.5 * math.sqrt(max(1.0 - sigma * sigma, 0.0))
    lo = 0.5 - half_width
    hi = 0.5 + half_width
    if lo < ALPHA_CLAMP:  # symmetric clamp keeps lo + hi = 1 exactly
        lo = ALPHA_CLAMP
        hi = 1.0 - ALPHA_CLAMP
    return ThetaConstruction(
        True,
        theta=0.5 * r,
        interval=AlphaInterval(sigma=sigma, lo=lo, hi=hi, feasible=True),
    )


def classical_passivity_check(
    system: GeneralDelaySystem, Q, theta, tol: Tolerance = DEFAULT_TOL
) -> Certificate:
    """Riccati-type delay passivity test in general coordinates.

    Certifies when Q and Theta are symmetric positive definite
    (ValueError otherwise, these are preconditions),

        A0^T Q + Q A0 + Q A1 Theta^{-1} A1^T Q + Theta  is NSD,

    and the output condition C = B^T Q holds within rank_tol * ||C||.
    """
    q = _require_spd(Q, "Q", tol)
    th = _require_spd(theta, "Theta", tol)
    lhs = _riccati_form(system, q, th)
    report = is_psd(-lhs, tol)
    residual = float(np.linalg.norm(system.C - system.B.T @ q))
    out_ok = residual <= tol.rank_tol * float(np.linalg.norm(system.C))
    if not out_ok:
        reason = f"output_mismatch: ||C - B^T Q|| = {residual:.3e}"
    elif not report.is_psd:
        reason = "inequality_indefinite"
    else:
        reason = ""
    return Certificate(
        verdict=CERTIFIED if (out_ok and report.is_psd) else REFUTED,
        condition_matrix=-lhs,
        min_eigenvalue=report.min_eigenvalue,
        witness=report.witness,
        theta_used=th,
        reason=reason,
        slack=report.slack,
    )


def _require_spd(matrix, name, tol):
    m = require_symmetric(matrix, name)
    report = is_psd(m, tol)
    if report.min_eigenvalue <= report.slack:
        raise ValueError(
            f"{name} must be symmetric positive definite "
            f"(min eigenvalue {report.min_eigenvalue:.6g})"
        )
    return m


def _riccati_form(system, q, th):
    qa1 = q @ system.A1
    return (
        system.A0.T @ q
        + q @ system.A0
        + qa1 @ np.linalg.solve(th, qa1.T)
        + th
    )


@dataclass(frozen=True)
class ClassicalCrosscheck:
    """Agreement report between the block certificate and the Riccati test.

    With Q = H/2 the Riccati form collapses algebraically to
    ``-R + Theta + (1/4) Z Theta^{-1} Z^T`` (the Schur complement of (*)),
    so for a certified system the inequality part must pass; the classical
    output condition C = B^T Q, however, evaluates to G^T/2 against the
    port-Hamiltonian output G^T and is reported as a residual instead of
    being folded into the verdict.
    """

    inequality_certified: bool
    min_eigenvalue: float
    identity_error: float
    output_residual: float
    certificate: Certificate


def crosscheck_classical(
    system: DelayPHSystem, theta, tol: Tolerance = DEFAULT_TOL
) -> ClassicalCrosscheck:
    """Re-derive a block certificate through the classical Riccati route.

    Preconditions: certify_delay_ph(system, theta) is CERTIFIED and Theta
    is positive definite (ValueError otherwise).
    """
    base = certify_delay_ph(system, theta, tol)
    if not base.certified:
        raise ValueError(
            "crosscheck requires a certified pair (system, Theta); got "
            f"{base.verdict} ({base.reason})"
        )
    th = _require_spd(theta, "Theta", tol)
    general = delay_ph_to_general(system)
    q = 0.5 * system.H
    lhs = _riccati_form(general, q, th)
    rhs = -system.R + th + 0.25 * (system.Z @ np.linalg.solve(th, system.Z.T))
    identity_error = float(np.max(np.abs(lhs - rhs))) if lhs.size else 0.0
    report = is_psd(-lhs, tol)
    output_residual = float(np.linalg.norm(general.C - general.B.T @ q))
    cert = Certificate(
        verdict=CERTIFIED if report.is_psd else REFUTED,
        condition_matrix=-lhs,
        min_eigenvalue=report.min_eigenvalue,
        witness=report.witness,
        theta_used=th,
        reason="" if report.is_psd else "inequality_indefinite",
        slack=report.slack,
    )
    return ClassicalCrosscheck(
        inequality_certified=report.is_psd,
        min_eigenvalue=report.min_eigenvalue,
        identity_error=identity_error,
        output_residual=output_residual,
        certificate=cert,
    )


def kyp_delay_check(
    system: GeneralDelaySystem, Q11, Q22, tol: Tolerance = DEFAULT_TOL
) -> Certificate:
    """Block KYP test for delay passivity in general coordinates.

    Certifies when

        [[-A0^T Q11 - Q11 A0 - Q22, -Q11 A1],
         [-A1^T Q11,                  Q22  ]]  is PSD

    and C = B^T Q11 within rank_tol * ||C||.
    """
    q11 = require_symmetric(Q11, "Q11")
    q22 = require_symmetric(Q22, "Q22")
    n = system.n
    block = np.empty((2 * n, 2 * n))
    block[:n, :n] = -system.A0.T @ q11 - q11 @ system.A0 - q22
    block[:n, n:] = -q11 @ system.A1
    block[n:, :n] = block[:n, n:].T
    block[n:, n:] = q22
    report = is_psd(block, tol)
    residual = float(np.linalg.norm(system.C - system.B.T @ q11))
    out_ok = residual <= tol.rank_tol * float(np.linalg.norm(system.C))
    if not out_ok:
        reason = f"output_mismatch: ||C - B^T Q11|| = {residual:.3e}"
    elif not report.is_psd:
        reason = "block_indefinite"
    else:
        reason = ""
    return Certificate(
        verdict=CERTIFIED if (out_ok and report.is_psd) else REFUTED,
        condition_matrix=block,
        min_eigenvalue=report.min_eigenvalue,
        witness=report.witness,
        reason=reason,
        slack=report.slack,
    )


def exists_certifying_theta_grid(
    R, Z, resolution: float = 0.02, box_scale: float = 2.0
):
    """Brute-force existence oracle for a certifying Theta (n <= 2 only).

    Scans symmetric positive-definite Theta candidates on a regular grid,
    diagonal entries over (0, box_scale * ||R||] and the off-diagonal entry
    over [-box_scale * ||R||, box_scale * ||R||], with step
    resolution * ||R|| per axis.  Each candidate is decided by the
    closed-form 2x2 Schur complement of (*), independently of the
    eigendecomposition and whitening machinery used elsewhere.  Returns
    ``(found, theta)`` with the first certifying grid point, or
    ``(False, None)``.  Boundary (singular PSD) Theta candidates are not
    scanned; the oracle is a desk-scale approximation of true existence.
    """
    r = require_symmetric(R, "R")
    z = as_matrix(Z, "Z")
    n = r.shape[0]
    if z.shape != (n, n):
        raise ValueError(f"Z has shape {z.shape}, expected {(n, n)}")
    if n not in (1, 2):
        raise ValueError("the grid oracle supports n = 1 and n = 2 only")
    scale = spectral_norm(r)
    if scale == 0.0:
        if spectral_norm(z) == 0.0:
            return True, np.zeros((n, n))
        return False, None
    step = resolution * scale
    axis = np.arange(step, box_scale * scale + 0.5 * step, step)
    slack = 1e-12 * scale

    if n == 1:
        r0 = float(r[0, 0])
        z0 = float(z[0, 0])
        good = (r0 - axis >= -slack) & (
            (r0 - axis) * axis - 0.25 * z0 * z0 >= -slack * scale
        )
        idx = np.flatnonzero(good)
        if idx.size:
            return True, np.array([[axis[idx[0]]]])
        return False, None

    off_axis = np.arange(
        -box_scale * scale, box_scale * scale + 0.5 * step, step
    )
    r11, r12, r22 = float(r[0, 0]), float(r[0, 1]), float(r[1, 1])
    z11, z12 = float(z[0, 0]), float(z[0, 1])
    z21, z22 = float(z[1, 0]), float(z[1, 1])
    t22g, t12g = np.meshgrid(axis, off_axis, indexing="ij")
    for t11 in axis:
        det = t11 * t22g - t12g * t12g
        pd = det > slack * scale
        if not pd.any():
            continue
        # W = Z Theta^{-1} Z^T via the 2x2 adjugate, entrywise
        a = z11 * t22g - z12 * t12g
        b = -z11 * t12g + z12 * t11
        c = z21 * t22g - z22 * t12g
        d = -z21 * t12g + z22 * t11
        w11 = (a * z11 + b * z12) / det
        w12 = (a * z21 + b * z22) / det
        w22 = (c * z21 + d * z22) / det
        s11 = r11 - t11 - 0.25 * w11
        s22 = r22 - t22g - 0.25 * w22
        s12 = r12 - t12g - 0.25 * w12
        good = (
            pd
            & (s11 >= -slack)
            & (s22 >= -slack)
            & (s11 * s22 - s12 * s12 >= -slack * scale)
        )
        if good.any():
            i, j = np.argwhere(good)[0]
            theta = np.array(
                [[t11, off_axis[j]], [off_axis[j], axis[i]]]
            )
            return True, theta
    return False, None
