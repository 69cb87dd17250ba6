"""Shared random-instance generators for the test suite.

Everything takes an explicit ``numpy.random.Generator`` so each test file
controls its own seed and failures reproduce exactly.
"""

import numpy as np

from phdelay import DelayPHSystem


def rand_orth(rng, n):
    """Random orthogonal matrix (QR of a Gaussian, sign-fixed)."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def rand_spd(rng, n, eig_range=(0.5, 2.0)):
    """Random symmetric positive definite matrix with eigenvalues in eig_range."""
    q = rand_orth(rng, n)
    evals = rng.uniform(eig_range[0], eig_range[1], size=n)
    m = (q * evals) @ q.T
    return 0.5 * (m + m.T)


def rand_antisym(rng, n, scale=1.0):
    m = scale * rng.standard_normal((n, n))
    return 0.5 * (m - m.T)


def rand_certified_delay_ph(rng, n, m=1, tau=1.0):
    """Random delay system whose attached theta certifies with margin.

    Construction: pick theta and S = R - theta both spd, then scale Z so
    that ||Z||/2 stays below the smaller of their least eigenvalues.  The
    condition block is then [[S, Z/2], [Z^T/2, theta]], which dominates
    lam_min(S, theta) - ||Z||/2 > 0, so certify_delay_ph must return
    CERTIFIED with min eigenvalue >= 0.1 * lam_min >= 0.03.
    """
    theta = rand_spd(rng, n, (0.3, 1.0))
    s_mat = rand_spd(rng, n, (0.3, 1.0))
    lam = min(
        float(np.linalg.eigvalsh(theta)[0]), float(np.linalg.eigvalsh(s_mat)[0])
    )
    z = rng.standard_normal((n, n))
    norm = np.linalg.norm(z, 2)
    if norm > 0:
        z *= rng.uniform(0.2, 0.9) * 2.0 * lam / norm
    return DelayPHSystem(
        H=rand_spd(rng, n, (0.5, 2.0)),
        J=rand_antisym(rng, n),
        R=s_mat + theta,
        Z=z,
        G=rng.standard_normal((n, m)),
        tau=tau,
        theta=theta,
    )
