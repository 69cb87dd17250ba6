"""Shared certificate record for the certification routines."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["CERTIFIED", "REFUTED", "INCONCLUSIVE", "Certificate"]

CERTIFIED = "CERTIFIED"
REFUTED = "REFUTED"
INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class Certificate:
    """Verdict plus the evidence that produced it.

    For a CERTIFIED verdict ``min_eigenvalue`` is the smallest eigenvalue of
    the tested condition matrix (>= -slack); for REFUTED the ``witness``
    vector exhibits a negative quadratic form on ``condition_matrix`` (or on
    the offending matrix named by ``reason``).
    """

    verdict: str
    condition_matrix: np.ndarray | None = None
    min_eigenvalue: float | None = None
    witness: np.ndarray | None = None
    theta_used: np.ndarray | None = None
    reason: str = ""
    slack: float | None = None

    @property
    def certified(self) -> bool:
        return self.verdict == CERTIFIED

    def to_dict(self) -> dict:
        """JSON-ready summary (verdict, min eigenvalue, witness, theta, reason)."""
        return {
            "verdict": self.verdict,
            "min_eigenvalue": self.min_eigenvalue,
            "witness": None if self.witness is None else [float(w) for w in self.witness],
            "theta": None if self.theta_used is None else [
                [float(v) for v in row] for row in np.atleast_2d(self.theta_used)
            ],
            "reason": self.reason,
        }
