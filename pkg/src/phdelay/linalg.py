"""Dense linear-algebra primitives with an explicit tolerance policy.

Every routine here is a pure function on real 2-D numpy arrays.  Rank-type
decisions (kernels, images, subspace relations) are made relative to the
largest singular value; semidefiniteness tests grant an absolute eigenvalue
slack that defaults to ``1e-9 * (1 + ||M||_2)``.  Higher-level certificates
report exactly the slack they were granted, so these primitives return
witnesses (eigenvectors, measured norms) rather than bare booleans where
that matters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DEFAULT_TOL",
    "PsdReport",
    "Tolerance",
    "as_matrix",
    "image_basis",
    "intersection_trivial",
    "is_psd",
    "kernel_basis",
    "numerical_rank",
    "require_symmetric",
    "schur_complement_lower",
    "skew_part",
    "spectral_norm",
    "subspace_contained",
    "sym_part",
    "whitening_basis",
]

#: relative asymmetry beyond which a matrix is rejected as "not symmetric"
SYMMETRY_RTOL = 1e-12


@dataclass(frozen=True)
class Tolerance:
    """Numerical slack policy shared by all certification routines.

    psd_tol
        Absolute eigenvalue slack for semidefiniteness tests: a symmetric
        matrix counts as PSD when its smallest eigenvalue is >= -psd_tol.
        ``None`` (the default) means auto-scale, ``1e-9 * (1 + ||M||_2)``.
    rank_tol
        Relative singular-value cutoff for rank and kernel decisions:
        singular values <= rank_tol * sigma_max are treated as zero.
    """

    psd_tol: float | None = None
    rank_tol: float = 1e-10

    def __post_init__(self):
        if self.psd_tol is not None and not self.psd_tol >= 0.0:
            raise ValueError("psd_tol must be nonnegative")
        if not self.rank_tol >= 0.0:
            raise ValueError("rank_tol must be nonnegative")

    def psd_slack(self, scale: float) -> float:
        """Effective PSD slack for a matrix with spectral norm ``scale``."""
        if self.psd_tol is not None:
            return self.psd_tol
        return 1e-9 * (1.0 + float(scale))


DEFAULT_TOL = Tolerance()


@dataclass(frozen=True)
class PsdReport:
    """Outcome of a semidefiniteness test.

    ``witness`` is a unit eigenvector for ``min_eigenvalue``; when the
    verdict is NOT_PSD it exhibits a negative quadratic form.  ``slack``
    records the absolute eigenvalue slack that was granted.
    """

    verdict: str  # "PSD" | "NOT_PSD"
    min_eigenvalue: float
    witness: np.ndarray
    slack: float

    @property
    def is_psd(self) -> bool:
        return self.verdict == "PSD"


def as_matrix(value, name: str = "matrix") -> np.ndarray:
    """Coerce ``value`` to a finite 2-D float array; scalars become 1x1."""
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise ValueError(
            f"{name} must be a 2-D array or a scalar, got shape {arr.shape}"
        )
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def _square(value, name: str = "matrix") -> np.ndarray:
    arr = as_matrix(value, name)
    if arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    return arr


def sym_part(matrix) -> np.ndarray:
    """Symmetric part (M + M^T) / 2 of a square matrix."""
    m = _square(matrix)
    return 0.5 * (m + m.T)


def skew_part(matrix) -> np.ndarray:
    """Antisymmetric part (M - M^T) / 2 of a square matrix."""
    m = _square(matrix)
    return 0.5 * (m - m.T)


def asymmetry(matrix) -> float:
    """Relative asymmetry ||M - M^T||_F / (1 + ||M||_F)."""
    m = _square(matrix)
    if m.size == 0:
        return 0.0
    d = m - m.T
    return math.sqrt(float((d * d).sum())) / (
        1.0 + math.sqrt(float((m * m).sum()))
    )


def require_symmetric(matrix, name: str = "matrix") -> np.ndarray:
    """Return the symmetrized matrix, rejecting genuine asymmetry.

    Tiny asymmetry (relative Frobenius asymmetry <= 1e-12, the kind produced
    by floating-point assembly of symmetric expressions) is silently
    symmetrized; anything larger raises ValueError.
    """
    m = _square(matrix, name)
    a = asymmetry(m)
    if a > SYMMETRY_RTOL:
        raise ValueError(
            f"{name} is not symmetric (relative asymmetry {a:.3e} > {SYMMETRY_RTOL:.0e})"
        )
    return 0.5 * (m + m.T)


def spectral_norm(matrix) -> float:
    """Largest singular value; 0.0 for an empty matrix."""
    m = as_matrix(matrix)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def is_psd(matrix, tol: Tolerance = DEFAULT_TOL) -> PsdReport:
    """Test a symmetric matrix for positive semidefiniteness.

    Uses a full symmetric eigendecomposition (never a Cholesky attempt) so
    the report always carries a witness eigenvector for the smallest
    eigenvalue.  The input must be symmetric within 1e-12 relative
    asymmetry; it is symmetrized before the decomposition.
    """
    m = require_symmetric(matrix)
    if m.size == 0:
        return PsdReport("PSD", 0.0, np.zeros(0), tol.psd_slack(0.0))
    evals, evecs = np.linalg.eigh(m)
    idx = int(np.argmin(evals))
    lam = float(evals[idx])
    witness = evecs[:, idx].copy()
    slack = tol.psd_slack(float(np.max(np.abs(evals))))
    verdict = "PSD" if lam >= -slack else "NOT_PSD"
    return PsdReport(verdict, lam, witness, slack)


def _svd_full(matrix):
    m = as_matrix(matrix)
    if m.size == 0:
        rows, cols = m.shape
        return np.eye(rows), np.zeros(0), np.eye(cols)
    u, s, vt = np.linalg.svd(m, full_matrices=True)
    return u, s, vt


def numerical_rank(matrix, tol: Tolerance = DEFAULT_TOL) -> int:
    """Rank with singular values truncated at rank_tol * sigma_max."""
    _, s, _ = _svd_full(matrix)
    if s.size == 0:
        return 0
    cutoff = tol.rank_tol * float(s[0])
    return int(np.count_nonzero(s > cutoff))


def kernel_basis(matrix, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical kernel of M.

    Returns an n x k array where k = n - rank(M); k = 0 yields an n x 0
    array, and the zero matrix yields the identity (full kernel).
    """
    m = as_matrix(matrix)
    _, s, vt = _svd_full(m)
    n = m.shape[1]
    cutoff = tol.rank_tol * float(s[0]) if s.size else 0.0
    rank = int(np.count_nonzero(s > cutoff))
    return vt[rank:].T.copy()


def image_basis(matrix, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical column space of M."""
    m = as_matrix(matrix)
    u, s, _ = _svd_full(m)
    cutoff = tol.rank_tol * float(s[0]) if s.size else 0.0
    rank = int(np.count_nonzero(s > cutoff))
    return u[:, :rank].copy()


def subspace_contained(basis, matrix, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Whether span(basis) lies inside ker(matrix).

    True iff ||M @ basis||_2 <= rank_tol * max(1, ||M||_2).  An empty basis
    is contained in everything.
    """
    b = as_matrix(basis, "basis")
    m = as_matrix(matrix)
    if b.shape[1] == 0:
        return True
    if m.shape[1] != b.shape[0]:
        raise ValueError(
            f"shape mismatch: matrix has {m.shape[1]} columns, basis vectors "
            f"have length {b.shape[0]}"
        )
    bound = tol.rank_tol * max(1.0, spectral_norm(m))
    return spectral_norm(m @ b) <= bound


def intersection_trivial(basis, matrix, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Whether span(basis) meets the column space of M only at 0.

    Decided by a rank test on the stacked basis [basis | image_basis(M)]:
    the intersection is trivial iff the stack has full column rank.
    """
    b = as_matrix(basis, "basis")
    img = image_basis(matrix, tol)
    if b.shape[1] == 0 or img.shape[1] == 0:
        return True
    if b.shape[0] != img.shape[0]:
        raise ValueError("basis and matrix live in different spaces")
    stacked = np.hstack([b, img])
    return numerical_rank(stacked, tol) == b.shape[1] + img.shape[1]


def whitening_basis(matrix, tol: Tolerance = DEFAULT_TOL):
    """Whitening transform of a symmetric PSD matrix.

    Returns ``(V1, r)`` where r is the numerical rank and V1 is n x r with
    V1^T M V1 = I_r (columns are eigenvectors scaled by 1/sqrt(eigenvalue);
    eigenvalues <= rank_tol * lambda_max count as zero).  Raises ValueError
    when M is not PSD within the tolerance.
    """
    m = require_symmetric(matrix)
    if m.size == 0:
        return np.zeros((0, 0)), 0
    evals, evecs = np.linalg.eigh(m)
    scale = float(np.max(np.abs(evals))) if evals.size else 0.0
    if float(evals[0]) < -tol.psd_slack(scale):
        raise ValueError(
            f"matrix is not positive semidefinite (min eigenvalue {evals[0]:.3e})"
        )
    lam_max = max(float(evals[-1]), 0.0)
    keep = evals > tol.rank_tol * lam_max
    if lam_max == 0.0:
        keep = np.zeros_like(evals, dtype=bool)
    v1 = evecs[:, keep] / np.sqrt(evals[keep])
    return v1, int(np.count_nonzero(keep))


def schur_complement_lower(matrix, block_size: int, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Schur complement A - B D^{-1} B^T of the lower-right block.

    ``matrix`` is symmetric and partitioned as [[A, B], [B^T, D]] with A of
    order ``block_size``.  D must be invertible within the rank tolerance.
    """
    m = require_symmetric(matrix)
    k = int(block_size)
    if not 0 <= k <= m.shape[0]:
        raise ValueError(f"block_size {k} out of range for order {m.shape[0]}")
    a = m[:k, :k]
    b = m[:k, k:]
    d = m[k:, k:]
    if d.size == 0:
        return a.copy()
    devals = np.linalg.eigvalsh(d)
    dscale = float(np.max(np.abs(devals)))
    if dscale == 0.0 or float(np.min(np.abs(devals))) <= tol.rank_tol * dscale:
        raise ValueError("lower-right block is numerically singular")
    comp = a - b @ np.linalg.solve(d, b.T)
    return 0.5 * (comp + comp.T)
