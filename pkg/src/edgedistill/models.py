"""Pluggable binary classifiers over feature vectors.

Two reference architectures sit behind one flat-parameter interface:
a linear-softmax student and a one-hidden-layer MLP teacher.  Anything that
can produce logits and back-propagate a logit gradient into a flat vector
(``infer_logits`` / ``loss_gradient`` / ``apply_update``) fits the same seam.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from . import kernels
from .errors import InvalidInputError, InvalidParameterError, TrainingFailureError
from .numerics import check_alpha, per_sample_logit_grads, per_sample_losses, softmax_batch

INIT_SCALE = 0.1
_ACTIVATIONS = {"relu": 0, "tanh": 1}


@dataclass(frozen=True)
class ClassifierSpec:
    kind: Literal["linear", "mlp"]
    input_dim: int
    hidden_dim: int = 0
    activation: Literal["relu", "tanh"] = "relu"
    n_classes: int = 2

    def __post_init__(self):
        if self.kind not in ("linear", "mlp"):
            raise InvalidParameterError(f"unknown classifier kind {self.kind!r}")
        if self.input_dim < 1 or self.n_classes < 2:
            raise InvalidParameterError("input_dim must be >= 1 and n_classes >= 2")
        if self.kind == "mlp":
            if self.hidden_dim < 1:
                raise InvalidParameterError("mlp needs hidden_dim >= 1")
            if self.activation not in _ACTIVATIONS:
                raise InvalidParameterError(f"unknown activation {self.activation!r}")

    @property
    def param_count(self) -> int:
        D, C, H = self.input_dim, self.n_classes, self.hidden_dim
        if self.kind == "linear":
            return C * D + C
        return H * D + H + C * H + C

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "input_dim": self.input_dim, "n_classes": self.n_classes}
        if self.kind == "mlp":
            d.update(hidden_dim=self.hidden_dim, activation=self.activation)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ClassifierSpec":
        return cls(
            kind=d["kind"],
            input_dim=int(d["input_dim"]),
            hidden_dim=int(d.get("hidden_dim", 0)),
            activation=d.get("activation", "relu"),
            n_classes=int(d.get("n_classes", 2)),
        )


@dataclass(frozen=True)
class ClassifierParams:
    """Flat parameter vector plus the number of updates applied to it."""

    flat: np.ndarray
    version: int = 0

    def __post_init__(self):
        flat = np.array(self.flat, dtype=np.float64, copy=True)
        flat.setflags(write=False)
        object.__setattr__(self, "flat", flat)


@dataclass(frozen=True)
class Sample:
    id: int
    features: np.ndarray
    label: int
    provenance: tuple | str = "unassigned"


@dataclass
class LossSpec:
    """Which per-sample loss applies: ``kd``, ``ce`` or ``combined`` (alpha-weighted)."""

    kind: Literal["kd", "ce", "combined"]
    y_true: int | None = None
    cloud_soft: np.ndarray | None = None
    T: float = 1.0
    alpha: float = 0.5
    weight: float = field(default=1.0)

    def term_weights(self) -> tuple[float, float]:
        if self.kind == "kd":
            return 1.0, 0.0
        if self.kind == "ce":
            return 0.0, 1.0
        if self.kind == "combined":
            a = check_alpha(self.alpha)
            return a, 1.0 - a
        raise InvalidParameterError(f"unknown loss kind {self.kind!r}")


def init_params(spec: ClassifierSpec, seed: int, scale: float = INIT_SCALE) -> ClassifierParams:
    rng = np.random.default_rng(seed)
    return ClassifierParams(rng.uniform(-scale, scale, size=spec.param_count), 0)


def _check_params(spec: ClassifierSpec, params: ClassifierParams) -> np.ndarray:
    if params.flat.shape != (spec.param_count,):
        raise InvalidInputError(
            f"parameter vector has length {params.flat.size}, {spec.kind} expects {spec.param_count}"
        )
    return params.flat


def _as_matrix(spec: ClassifierSpec, features) -> np.ndarray:
    X = np.asarray(features, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != spec.input_dim:
        raise InvalidInputError(f"features of shape {X.shape} do not match input_dim={spec.input_dim}")
    return np.ascontiguousarray(X)


def logits_batch(spec: ClassifierSpec, params: ClassifierParams, X: np.ndarray) -> np.ndarray:
    flat = _check_params(spec, params)
    X = _as_matrix(spec, X)
    if spec.kind == "linear":
        return kernels.linear_forward(flat, X, spec.n_classes)
    return kernels.mlp_forward(flat, X, spec.hidden_dim, spec.n_classes, _ACTIVATIONS[spec.activation])


def backprop(spec: ClassifierSpec, params: ClassifierParams, X: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Push a per-row logit gradient ``G`` back into a flat parameter gradient (summed over rows)."""
    flat = _check_params(spec, params)
    X = _as_matrix(spec, X)
    G = np.ascontiguousarray(G, dtype=np.float64)
    if spec.kind == "linear":
        return kernels.linear_backward(X, G, spec.n_classes)
    return kernels.mlp_backward(flat, X, G, spec.hidden_dim, spec.n_classes, _ACTIVATIONS[spec.activation])


def infer_logits(spec: ClassifierSpec, params: ClassifierParams, features) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidInputError("infer_logits takes a single feature vector; use logits_batch")
    return logits_batch(spec, params, x)[0]


def predict(spec: ClassifierSpec, params: ClassifierParams, features) -> tuple[int, np.ndarray]:
    """Argmax class and its distribution.  Exact ties resolve to class 0."""
    probs = softmax_batch(logits_batch(spec, params, np.asarray(features, dtype=np.float64)[None, :]))[0]
    return int(np.argmax(probs)), probs


def predict_batch(spec: ClassifierSpec, params: ClassifierParams, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    probs = softmax_batch(logits_batch(spec, params, X))
    return np.argmax(probs, axis=1), probs


def _batch_arrays(spec: ClassifierSpec, batch: Sequence[tuple[Sample, LossSpec]]):
    if not batch:
        raise InvalidInputError("loss batch is empty")
    n, C = len(batch), spec.n_classes
    X = np.empty((n, spec.input_dim))
    y = np.zeros(n, dtype=np.int64)
    Q = np.full((n, C), 1.0 / C)
    kd_w = np.empty(n)
    ce_w = np.empty(n)
    row_w = np.empty(n)
    temps = {ls.T for _, ls in batch if ls.kind != "ce"}
    if len(temps) > 1:
        raise InvalidParameterError("all distillation terms in one batch must share a temperature")
    T = temps.pop() if temps else 1.0
    for i, (sample, ls) in enumerate(batch):
        X[i] = sample.features
        a, b = ls.term_weights()
        kd_w[i], ce_w[i], row_w[i] = a, b, ls.weight
        if b:
            if ls.y_true is None:
                raise InvalidInputError(f"sample {sample.id}: cross-entropy term needs y_true")
            y[i] = ls.y_true
        if a:
            if ls.cloud_soft is None:
                raise InvalidInputError(f"sample {sample.id}: distillation term needs cloud_soft")
            Q[i] = ls.cloud_soft
    return X, y, Q, kd_w, ce_w, row_w, T


def weighted_loss_and_grad(
    spec: ClassifierSpec,
    params: ClassifierParams,
    X: np.ndarray,
    y: np.ndarray,
    cloud_soft: np.ndarray,
    kd_w: np.ndarray,
    ce_w: np.ndarray,
    T: float,
    row_w: np.ndarray,
) -> tuple[float, np.ndarray]:
    """``sum_i row_w[i] * L_i`` and its gradient with respect to the flat parameters."""
    Z = logits_batch(spec, params, X)
    losses = per_sample_losses(Z, y, cloud_soft, kd_w, ce_w, T)
    G = per_sample_logit_grads(Z, y, cloud_soft, kd_w, ce_w, T) * row_w[:, None]
    return float(np.dot(row_w, losses)), backprop(spec, params, X, G)


def batch_loss(spec: ClassifierSpec, params: ClassifierParams, batch: Sequence[tuple[Sample, LossSpec]]) -> float:
    X, y, Q, kd_w, ce_w, row_w, T = _batch_arrays(spec, batch)
    Z = logits_batch(spec, params, X)
    return float(np.dot(row_w, per_sample_losses(Z, y, Q, kd_w, ce_w, T)) / row_w.sum())


def loss_gradient(spec: ClassifierSpec, params: ClassifierParams, batch: Sequence[tuple[Sample, LossSpec]]) -> np.ndarray:
    """Analytic gradient of the (``LossSpec.weight``-weighted) mean per-sample loss.

    With all weights at their default of 1 this is the plain batch mean.
    """
    X, y, Q, kd_w, ce_w, row_w, T = _batch_arrays(spec, batch)
    _, grad = weighted_loss_and_grad(spec, params, X, y, Q, kd_w, ce_w, T, row_w / row_w.sum())
    return grad


def apply_update(params: ClassifierParams, gradient, eta: float) -> ClassifierParams:
    g = np.asarray(gradient, dtype=np.float64)
    if g.shape != params.flat.shape:
        raise InvalidInputError(f"gradient length {g.size} != parameter length {params.flat.size}")
    if eta < 0:
        raise InvalidParameterError(f"learning rate must be >= 0, got {eta}")
    return ClassifierParams(params.flat - eta * g, params.version + 1)


def train_initial(
    spec: ClassifierSpec,
    train_set: Sequence[Sample],
    epochs: int,
    lr: float,
    seed: int,
    init_scale: float = INIT_SCALE,
) -> ClassifierParams:
    """Full-batch gradient descent on mean cross-entropy from a seeded uniform init.

    Returns version 0 regardless of the number of epochs.
    """
    if not train_set:
        raise InvalidInputError("training set is empty")
    params = init_params(spec, seed, init_scale)
    X = np.ascontiguousarray(np.stack([s.features for s in train_set]), dtype=np.float64)
    y = np.fromiter((s.label for s in train_set), dtype=np.int64, count=len(train_set))
    n = len(train_set)
    ones = np.ones(n)
    zeros = np.zeros(n)
    dummy = np.full((n, spec.n_classes), 1.0 / spec.n_classes)
    row_w = np.full(n, 1.0 / n)
    flat = params.flat.copy()
    # divergence is detected explicitly below, so numpy's overflow warnings are noise
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(epochs):
            loss, grad = weighted_loss_and_grad(spec, ClassifierParams(flat), X, y, dummy, zeros, ones, 1.0, row_w)
            if not np.isfinite(loss) or not np.all(np.isfinite(grad)):
                raise TrainingFailureError(f"{spec.kind} training diverged at epoch {epoch}")
            flat -= lr * grad
    if not np.all(np.isfinite(flat)):
        raise TrainingFailureError(f"{spec.kind} training produced non-finite parameters")
    return ClassifierParams(flat, 0)


# Checkpoints.  Binary layout (little-endian):
#   b"EDKD" | uint32 header length | UTF-8 JSON header | float64 values
# The JSON header holds the ClassifierSpec fields plus ``version`` and ``count``.
# The JSON format is the same header object with an extra ``params`` array.

_MAGIC = b"EDKD"


def save_checkpoint(path, spec: ClassifierSpec, params: ClassifierParams, fmt: str = "json") -> Path:
    path = Path(path)
    header = {**spec.to_dict(), "version": params.version, "count": int(params.flat.size)}
    if fmt == "json":
        header["params"] = [float(v) for v in params.flat]
        path.write_text(json.dumps(header, indent=1) + "\n")
    elif fmt == "binary":
        blob = json.dumps(header, sort_keys=True).encode()
        with path.open("wb") as fh:
            fh.write(_MAGIC + struct.pack("<I", len(blob)) + blob)
            fh.write(params.flat.astype("<f8").tobytes())
    else:
        raise InvalidParameterError(f"unknown checkpoint format {fmt!r}")
    return path


def load_checkpoint(path) -> tuple[ClassifierSpec, ClassifierParams]:
    raw = Path(path).read_bytes()
    if raw[:4] == _MAGIC:
        (n,) = struct.unpack("<I", raw[4:8])
        header = json.loads(raw[8:8 + n])
        flat = np.frombuffer(raw[8 + n:], dtype="<f8").astype(np.float64)
    else:
        header = json.loads(raw)
        flat = np.asarray(header["params"], dtype=np.float64)
    spec = ClassifierSpec.from_dict(header)
    if flat.size != header["count"] or flat.size != spec.param_count:
        raise InvalidInputError(f"{path}: checkpoint holds {flat.size} values, header says {header['count']}")
    return spec, ClassifierParams(flat, int(header["version"]))
