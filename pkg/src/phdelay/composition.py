"""Feedback interconnection of delay port-Hamiltonian systems.

Two systems sharing one delay tau are coupled through their ports by
``u = F y + w`` (w is the new external input).  Stacking states and ports
gives another delay port-Hamiltonian system with

    H = blkdiag(H1, H2), J = blkdiag(J1, J2) + skew(G F G^T),
    R = blkdiag(R1, R2) - sym(G F G^T),  Z = blkdiag(Z1, Z2),
    G = blkdiag(G1, G2),

so the stored closed loop reproduces the subsystem trajectories exactly.
The coupled pair stays certifiable whenever both parts are certified and
the feedback does not generate energy, i.e. -sym(F) is PSD
(power-conserving feedback, sym(F) = 0, in particular).  Delayed output
feedback u = -F y(t - tau) + v applied to a delay-free port-Hamiltonian
system produces the delay structure Z = G F G^T; a norm bound on F
guarantees that the Theta construction succeeds for the closed loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .certificates import CERTIFIED, REFUTED, Certificate
from .certify import certify_delay_ph, ph_condition_matrix
from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    as_matrix,
    intersection_trivial,
    is_psd,
    kernel_basis,
    skew_part,
    spectral_norm,
    subspace_contained,
    sym_part,
    whitening_basis,
)
from .systems import DelayPHSystem, StandardPHSystem

__all__ = [
    "DISSIPATIVE",
    "GENERAL",
    "POWER_CONSERVING",
    "FeedbackConditions",
    "certify_interconnection",
    "check_feedback_conditions",
    "classify_feedback",
    "close_delayed_feedback",
    "feedback_gain_bound",
    "interconnect",
]

POWER_CONSERVING = "power_conserving"
DISSIPATIVE = "dissipative"
GENERAL = "general"


def classify_feedback(F, tol: Tolerance = DEFAULT_TOL) -> str:
    """Classify a port coupling matrix by its symmetric part.

    "power_conserving" when sym(F) vanishes (within 1e-12 relative),
    "dissipative" when -sym(F) is PSD, "general" otherwise.
    """
    f = as_matrix(F, "F")
    if f.shape[0] != f.shape[1]:
        raise ValueError(f"F must be square, got shape {f.shape}")
    sym = sym_part(f)
    if spectral_norm(sym) <= 1e-12 * (1.0 + spectral_norm(f)):
        return POWER_CONSERVING
    if is_psd(-sym, tol).is_psd:
        return DISSIPATIVE
    return GENERAL


def _blkdiag(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    out = np.zeros((a.shape[0] + b.shape[0], a.shape[1] + b.shape[1]))
    out[: a.shape[0], : a.shape[1]] = a
    out[a.shape[0] :, a.shape[1] :] = b
    return out


def interconnect(
    sys1: DelayPHSystem, sys2: DelayPHSystem, F
) -> DelayPHSystem:
    """Close the loop u = F y + w around the stacked pair.

    Both systems must share the same delay exactly; F must be
    (m1 + m2) x (m1 + m2).  The combined theta blkdiag(theta1, theta2) is
    attached when both subsystems carry one.
    """
    if sys1.tau != sys2.tau:
        raise ValueError(
            f"delays differ: {sys1.tau} vs {sys2.tau}; interconnection "
            "requires one shared delay"
        )
    f = as_matrix(F, "F")
    m = sys1.m + sys2.m
    if f.shape != (m, m):
        raise ValueError(f"F has shape {f.shape}, expected {(m, m)}")
    g = _blkdiag(sys1.G, sys2.G)
    gfg = g @ f @ g.T
    theta = None
    if sys1.theta is not None and sys2.theta is not None:
        theta = _blkdiag(sys1.theta, sys2.theta)
    return DelayPHSystem(
        H=_blkdiag(sys1.H, sys2.H),
        J=_blkdiag(sys1.J, sys2.J) + skew_part(gfg),
        R=_blkdiag(sys1.R, sys2.R) - sym_part(gfg),
        Z=_blkdiag(sys1.Z, sys2.Z),
        G=g,
        tau=sys1.tau,
        theta=theta,
    )


def certify_interconnection(
    sys1: DelayPHSystem, sys2: DelayPHSystem, F, tol: Tolerance = DEFAULT_TOL
) -> Certificate:
    """Certify the closed loop directly from the aggregated block condition.

    Both subsystems must carry a theta (ValueError otherwise).  The tested
    matrix is

        [[R - G sym(F) G^T - Theta, Z/2], [Z^T/2, Theta]]

    over the stacked structure, which equals the block condition of
    ``interconnect(sys1, sys2, F)`` with theta blkdiag(theta1, theta2).
    """
    if sys1.theta is None or sys2.theta is None:
        raise ValueError("both subsystems must carry a theta to certify")
    closed = interconnect(sys1, sys2, F)
    cond = ph_condition_matrix(closed.R, closed.Z, closed.theta)
    report = is_psd(cond, tol)
    return Certificate(
        verdict=CERTIFIED if report.is_psd else REFUTED,
        condition_matrix=cond,
        min_eigenvalue=report.min_eigenvalue,
        witness=report.witness,
        theta_used=closed.theta,
        reason="" if report.is_psd else "condition_indefinite",
        slack=report.slack,
    )


def close_delayed_feedback(
    system: StandardPHSystem, F, tau: float
) -> DelayPHSystem:
    """Apply delayed output feedback u = -F y(t - tau) + v.

    Turns a delay-free port-Hamiltonian system into a delay one with
    Z = G F G^T and all other structure matrices unchanged (no theta is
    attached; construct one separately).
    """
    f = as_matrix(F, "F")
    m = system.m
    if f.shape != (m, m):
        raise ValueError(f"F has shape {f.shape}, expected {(m, m)}")
    if not float(tau) > 0.0:
        raise ValueError(f"tau must be positive, got {tau}")
    return DelayPHSystem(
        H=system.H,
        J=system.J,
        R=system.R,
        Z=system.G @ f @ system.G.T,
        G=system.G,
        tau=float(tau),
    )


@dataclass(frozen=True)
class FeedbackConditions:
    """Kernel diagnostics for delayed output feedback on (R, G).

    output_kernel_trivial   ker(G^T) = {0} (G has full row rank)
    kernel_r_in_kernel_gt   ker(R) <= ker(G^T)
    kernel_r_image_disjoint ker(R) meets image(G) only at 0
    """

    output_kernel_trivial: bool
    kernel_r_in_kernel_gt: bool
    kernel_r_image_disjoint: bool

    @property
    def all_hold(self) -> bool:
        return (
            self.output_kernel_trivial
            and self.kernel_r_in_kernel_gt
            and self.kernel_r_image_disjoint
        )


def check_feedback_conditions(R, G, tol: Tolerance = DEFAULT_TOL) -> FeedbackConditions:
    """Evaluate the kernel hypotheses used by the feedback gain bound."""
    r = as_matrix(R, "R")
    g = as_matrix(G, "G")
    ker_gt = kernel_basis(g.T, tol)
    ker_r = kernel_basis(r, tol)
    return FeedbackConditions(
        output_kernel_trivial=ker_gt.shape[1] == 0,
        kernel_r_in_kernel_gt=subspace_contained(ker_r, g.T, tol),
        kernel_r_image_disjoint=intersection_trivial(ker_r, g, tol),
    )


def feedback_gain_bound(R, G, tol: Tolerance = DEFAULT_TOL) -> float:
    """Largest feedback norm with a guaranteed Theta construction.

    Returns beta = 1 / ||V1^T G||_2^2 (V1 whitens R): any F with
    ||F||_2 <= beta gives ||V1^T G F G^T V1||_2 <= 1, so construct_theta
    succeeds for the closed loop Z = G F G^T.  Requires ker(R) <= ker(G^T)
    and ker(R) disjoint from image(G) (ValueError otherwise).  Returns
    math.inf when V1^T G vanishes (no finite bound is needed).
    """
    r = as_matrix(R, "R")
    g = as_matrix(G, "G")
    ker_r = kernel_basis(r, tol)
    if not subspace_contained(ker_r, g.T, tol):
        raise ValueError("hypothesis violated: ker(R) is not contained in ker(G^T)")
    if not intersection_trivial(ker_r, g, tol):
        raise ValueError("hypothesis violated: ker(R) meets image(G)")
    v1, _ = whitening_basis(r, tol)
    coupling = spectral_norm(v1.T @ g)
    if coupling == 0.0:
        return math.inf
    return 1.0 / (coupling * coupling)
