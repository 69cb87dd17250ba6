"""Dissipativity tests for standard (delay-free) LTI systems.

A system x' = Ax + Bu, y = Cx is port-Hamiltonian for an energy matrix H
exactly when the weighted system matrix

    Sigma = [[H A, H B],
             [ -C,   0]]

has negative semidefinite symmetric part.  The symmetric/antisymmetric
split of Sigma then yields the structure matrices:

    -sym(Sigma) = [[R, 0], [0, 0]],    skew(Sigma) = [[J, G], [-G^T, 0]],

so that H x' = (J - R) x + G u and y = G^T x.  The classical
Kalman-Yakubovich-Popov matrix

    W(H) = [[-A^T H - H A, C^T - H B],
            [ C - B^T H,        0  ]]

satisfies W(H) = -2 sym(Sigma) identically; both views are exposed.
Asymptotic stability of A is deliberately not examined here; the tests are
purely algebraic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .certificates import CERTIFIED, REFUTED, Certificate
from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    as_matrix,
    is_psd,
    numerical_rank,
    skew_part,
    sym_part,
)
from .systems import StandardLTISystem

__all__ = [
    "MINIMAL",
    "NOT_CONTROLLABLE",
    "NOT_OBSERVABLE",
    "SigmaDecomposition",
    "StandardPHCertificate",
    "certify_ph",
    "check_minimality",
    "hamiltonian",
    "kyp_matrix",
    "weighted_system_matrix",
]

MINIMAL = "minimal"
NOT_CONTROLLABLE = "not_controllable"
NOT_OBSERVABLE = "not_observable"


@dataclass(frozen=True)
class SigmaDecomposition:
    """Structure matrices extracted from the weighted system matrix."""

    J: np.ndarray
    R: np.ndarray
    G: np.ndarray


@dataclass(frozen=True)
class StandardPHCertificate:
    certificate: Certificate
    decomposition: SigmaDecomposition | None = None

    @property
    def certified(self) -> bool:
        return self.certificate.certified


def weighted_system_matrix(system: StandardLTISystem, H) -> np.ndarray:
    """Assemble [[H A, H B], [-C, 0]]."""
    h = as_matrix(H, "H")
    n, m = system.n, system.m
    out = np.zeros((n + m, n + m))
    out[:n, :n] = h @ system.A
    out[:n, n:] = h @ system.B
    out[n:, :n] = -system.C
    return out


def kyp_matrix(system: StandardLTISystem, H) -> np.ndarray:
    """Assemble [[-A^T H - H A, C^T - H B], [C - B^T H, 0]]."""
    h = as_matrix(H, "H")
    n, m = system.n, system.m
    out = np.zeros((n + m, n + m))
    out[:n, :n] = -system.A.T @ h - h @ system.A
    out[:n, n:] = system.C.T - h @ system.B
    out[n:, :n] = system.C - system.B.T @ h
    return out


def certify_ph(
    system: StandardLTISystem, H, tol: Tolerance = DEFAULT_TOL
) -> StandardPHCertificate:
    """Decide whether (A, B, C) is port-Hamiltonian for the energy matrix H.

    Certifies when sym(Sigma) is negative semidefinite AND the structural
    condition H B = C^T holds within rank_tol * max(1, ||C||); on success
    the returned decomposition carries J, R, G.  A failed structural
    condition refutes with reason "output_mismatch"; an indefinite
    symmetric part refutes with reason "dissipation_indefinite" and a
    witness direction.
    """
    h = as_matrix(H, "H")
    sigma = weighted_system_matrix(system, h)
    n = system.n
    residual = float(np.linalg.norm(h @ system.B - system.C.T))
    bound = tol.rank_tol * max(1.0, float(np.linalg.norm(system.C)))
    report = is_psd(-sym_part(sigma), tol)
    if residual > bound:
        cert = Certificate(
            verdict=REFUTED,
            condition_matrix=sigma,
            min_eigenvalue=report.min_eigenvalue,
            witness=None,
            reason=f"output_mismatch: ||H B - C^T|| = {residual:.3e}",
        )
        return StandardPHCertificate(cert)
    if not report.is_psd:
        cert = Certificate(
            verdict=REFUTED,
            condition_matrix=sigma,
            min_eigenvalue=report.min_eigenvalue,
            witness=report.witness,
            reason="dissipation_indefinite",
            slack=report.slack,
        )
        return StandardPHCertificate(cert)
    skew = skew_part(sigma)
    decomp = SigmaDecomposition(
        J=skew[:n, :n].copy(),
        R=-sym_part(sigma)[:n, :n].copy(),
        G=skew[:n, n:].copy(),
    )
    cert = Certificate(
        verdict=CERTIFIED,
        condition_matrix=sigma,
        min_eigenvalue=report.min_eigenvalue,
        witness=report.witness,
        slack=report.slack,
    )
    return StandardPHCertificate(cert, decomp)


def check_minimality(system: StandardLTISystem, tol: Tolerance = DEFAULT_TOL) -> str:
    """Kalman rank tests; controllability is checked first.

    Returns "minimal", "not_controllable", or "not_observable".
    """
    n = system.n
    ctrl = _krylov(system.A, system.B, n)
    if numerical_rank(ctrl, tol) < n:
        return NOT_CONTROLLABLE
    obs = _krylov(system.A.T, system.C.T, n)
    if numerical_rank(obs, tol) < n:
        return NOT_OBSERVABLE
    return MINIMAL


def _krylov(a, b, n):
    blocks = [b]
    for _ in range(n - 1):
        blocks.append(a @ blocks[-1])
    return np.hstack(blocks) if blocks else b


def hamiltonian(H, x) -> float:
    """Quadratic energy (1/2) x^T H x."""
    h = as_matrix(H, "H")
    vec = np.asarray(x, dtype=float).reshape(-1)
    return 0.5 * float(vec @ (h @ vec))
