"""Confidence score and threshold routing for edge predictions."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, InvalidParameterError
from .numerics import PROB_SUM_TOL

NON_ASD, ASD = 0, 1


class Outcome(enum.Enum):
    ACCEPT_LOCAL = "accept_local"
    UPLOAD_TO_CLOUD = "upload_to_cloud"


@dataclass(frozen=True)
class GateDecision:
    outcome: Outcome
    score: float
    threshold: float

    @property
    def uploaded(self) -> bool:
        return self.outcome is Outcome.UPLOAD_TO_CLOUD


def confidence(dist) -> float:
    """Absolute gap between the two class probabilities, in [0, 1]."""
    p = np.asarray(dist, dtype=np.float64)
    if p.shape != (2,):
        raise InvalidInputError(f"confidence is defined for binary distributions, got shape {p.shape}")
    if np.any(p < 0) or not np.all(np.isfinite(p)) or abs(p.sum() - 1.0) > PROB_SUM_TOL:
        raise InvalidInputError("not a probability distribution")
    return float(min(abs(p[ASD] - p[NON_ASD]), 1.0))


def confidence_batch(P: np.ndarray) -> np.ndarray:
    return np.minimum(np.abs(P[:, ASD] - P[:, NON_ASD]), 1.0)


def check_tau(tau: float) -> float:
    tau = float(tau)
    if not 0.0 <= tau <= 1.0:
        raise InvalidParameterError(f"threshold tau must lie in [0, 1], got {tau}")
    return tau


def gate(score: float, tau: float) -> GateDecision:
    # a score exactly at the threshold stays local
    tau = check_tau(tau)
    outcome = Outcome.ACCEPT_LOCAL if score >= tau else Outcome.UPLOAD_TO_CLOUD
    return GateDecision(outcome, float(score), tau)


def upload_mask(scores: np.ndarray, tau: float) -> np.ndarray:
    return np.asarray(scores) < check_tau(tau)
