"""Softmax, losses and gradient helpers for two-class (or small C-class) problems.

Every function here is pure.  Vectors are 1-D numpy arrays; the ``*_batch``
variants take ``(N, C)`` arrays and are what the protocol hot path uses.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import InvalidInputError, InvalidLabelError, InvalidParameterError, OracleFailureError

LOG_CLAMP = 1e-12
PROB_SUM_TOL = 1e-9


def _as_logits(logits) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    if z.ndim != 1 or z.shape[0] < 2:
        raise InvalidInputError(f"logits must be a vector of length >= 2, got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise InvalidInputError("logits contain NaN or Inf")
    return z


def _check_temperature(T: float) -> float:
    T = float(T)
    if not (T > 0.0) or not np.isfinite(T):
        raise InvalidParameterError(f"temperature must be a positive finite number, got {T}")
    return T


def check_prob_dist(p, name: str = "distribution") -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.shape[0] < 2:
        raise InvalidInputError(f"{name} must be a vector of length >= 2")
    if not np.all(np.isfinite(p)) or np.any(p < 0.0):
        raise InvalidInputError(f"{name} has negative or non-finite entries")
    if abs(p.sum() - 1.0) > PROB_SUM_TOL:
        raise InvalidInputError(f"{name} sums to {p.sum():.12g}, not 1")
    return p


def softmax(logits) -> np.ndarray:
    """Max-shifted softmax of a single logit vector."""
    z = _as_logits(logits)
    e = np.exp(z - z.max())
    return e / e.sum()


def tempered_softmax(logits, T: float) -> np.ndarray:
    """``softmax(logits / T)``; ``T == 1`` goes through plain :func:`softmax`."""
    T = _check_temperature(T)
    if T == 1.0:
        return softmax(logits)
    return softmax(_as_logits(logits) / T)


def softmax_batch(Z: np.ndarray, T: float = 1.0) -> np.ndarray:
    Z = np.asarray(Z, dtype=np.float64)
    if T != 1.0:
        Z = Z / _check_temperature(T)
    E = np.exp(Z - Z.max(axis=1, keepdims=True))
    return E / E.sum(axis=1, keepdims=True)


def kd_loss(cloud_soft, edge_soft) -> float:
    """KL(cloud || edge) with ``0 * log(0/q) = 0`` and edge entries clamped at 1e-12."""
    p = check_prob_dist(cloud_soft, "cloud_soft")
    q = check_prob_dist(edge_soft, "edge_soft")
    if p.shape != q.shape:
        raise InvalidInputError("cloud and edge distributions differ in length")
    return float(max(_kl_rows(p[None, :], q[None, :])[0], 0.0))


def _kl_rows(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    Q = np.maximum(Q, LOG_CLAMP)
    mask = P > 0.0
    terms = np.zeros_like(P)
    terms[mask] = P[mask] * (np.log(P[mask]) - np.log(Q[mask]))
    return terms.sum(axis=1)


def ce_loss(edge_probs, y_true: int) -> float:
    p = check_prob_dist(edge_probs, "edge_probs")
    y = _check_label(y_true, p.shape[0])
    return float(-np.log(max(p[y], LOG_CLAMP)))


def _check_label(y, n_classes: int) -> int:
    if isinstance(y, (bool, np.bool_)) or int(y) != y or not 0 <= int(y) < n_classes:
        raise InvalidLabelError(f"class index {y!r} outside [0, {n_classes})")
    return int(y)


def combined_loss(l_kd: float, l_ce: float, alpha: float) -> float:
    alpha = check_alpha(alpha)
    return alpha * l_kd + (1.0 - alpha) * l_ce


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise InvalidParameterError(f"alpha must lie in [0, 1], got {alpha}")
    return alpha


# Gradients with respect to the edge logits.  Cloud soft labels are constants.

def ce_logit_grad(logits, y_true: int) -> np.ndarray:
    p = softmax(logits)
    g = p.copy()
    g[_check_label(y_true, p.shape[0])] -= 1.0
    return g


def kd_logit_grad(logits, cloud_soft, T: float) -> np.ndarray:
    """d KL(cloud || softmax(z/T)) / dz = (softmax(z/T) - cloud) / T."""
    T = _check_temperature(T)
    return (tempered_softmax(logits, T) - check_prob_dist(cloud_soft, "cloud_soft")) / T


def per_sample_losses(
    Z: np.ndarray,
    y_true: np.ndarray,
    cloud_soft: np.ndarray,
    kd_weight: np.ndarray,
    ce_weight: np.ndarray,
    T: float,
) -> np.ndarray:
    """Vectorised ``kd_weight * L_KD + ce_weight * L_CE`` for a batch of edge logits.

    Rows with a zero weight skip the corresponding term entirely (so an unused
    ``y_true`` or ``cloud_soft`` row may hold any placeholder).
    """
    out = np.zeros(Z.shape[0])
    kd_rows = kd_weight != 0.0
    if np.any(kd_rows):
        Q = softmax_batch(Z[kd_rows], T)
        out[kd_rows] += kd_weight[kd_rows] * np.maximum(_kl_rows(cloud_soft[kd_rows], Q), 0.0)
    ce_rows = ce_weight != 0.0
    if np.any(ce_rows):
        P = softmax_batch(Z[ce_rows])
        picked = P[np.arange(P.shape[0]), y_true[ce_rows]]
        out[ce_rows] += ce_weight[ce_rows] * -np.log(np.maximum(picked, LOG_CLAMP))
    return out


def per_sample_logit_grads(
    Z: np.ndarray,
    y_true: np.ndarray,
    cloud_soft: np.ndarray,
    kd_weight: np.ndarray,
    ce_weight: np.ndarray,
    T: float,
) -> np.ndarray:
    """Row-wise gradient of :func:`per_sample_losses` with respect to ``Z``.

    The 1e-12 log clamp is ignored here; it only matters for probabilities
    that have already underflowed.
    """
    G = np.zeros_like(Z, dtype=np.float64)
    kd_rows = kd_weight != 0.0
    if np.any(kd_rows):
        Q = softmax_batch(Z[kd_rows], T)
        G[kd_rows] += (kd_weight[kd_rows] / T)[:, None] * (Q - cloud_soft[kd_rows])
    ce_rows = ce_weight != 0.0
    if np.any(ce_rows):
        P = softmax_batch(Z[ce_rows])
        P[np.arange(P.shape[0]), y_true[ce_rows]] -= 1.0
        G[ce_rows] += ce_weight[ce_rows][:, None] * P
    return G


def finite_diff_gradient(
    f: Callable[[np.ndarray], float], params, h: float = 1e-5
) -> np.ndarray:
    """Central-difference gradient of a scalar function, one coordinate at a time."""
    if not h > 0.0:
        raise InvalidParameterError(f"step h must be positive, got {h}")
    p = np.array(params, dtype=np.float64, copy=True).ravel()
    grad = np.empty_like(p)
    for i in range(p.size):
        orig = p[i]
        p[i] = orig + h
        up = float(f(p))
        p[i] = orig - h
        down = float(f(p))
        p[i] = orig
        if not (np.isfinite(up) and np.isfinite(down)):
            raise OracleFailureError(f"non-finite function value at coordinate {i}")
        grad[i] = (up - down) / (2.0 * h)
    return grad
