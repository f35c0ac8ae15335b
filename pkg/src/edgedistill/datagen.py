"""Synthetic two-class feature data, CSV ingestion, and train/simulation/test splitting."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, CSVParseError, InvalidInputError
from .models import Sample

TASKS = ("xor-blobs", "rings", "shifted-xor")
DEFAULT_FRACTIONS = (0.4, 0.5, 0.1)


@dataclass(frozen=True)
class DatasetBundle:
    train: tuple[Sample, ...]
    simulation: tuple[Sample, ...]
    test: tuple[Sample, ...]
    feature_dim: int
    seed: int


def _balanced_labels(n: int) -> np.ndarray:
    # classes alternate so any prefix is balanced to within one sample
    return np.arange(n) % 2


def generate_synthetic(
    n: int,
    feature_dim: int,
    seed: int,
    task: str = "xor-blobs",
    sigma: float = 0.35,
    minor_fraction: float = 0.2,
    minor_offset: float = 1.0,
) -> list[Sample]:
    """Balanced two-class data with a nonlinear decision boundary.

    ``xor-blobs``
        Four Gaussian clusters at (+-1, +-1); class 1 where the signs differ.
        Each class splits evenly between its two clusters.
    ``rings``
        Class 0 on the unit circle, class 1 on the circle of radius 2, with
        isotropic Gaussian jitter ``sigma``.
    ``shifted-xor``
        The XOR layout with unequal cluster masses: each class keeps a major
        cluster and sends ``minor_fraction`` of its samples to a minor cluster,
        whose x-coordinate is moved to ``-minor_offset`` (so ``minor_offset=1``
        is the plain XOR geometry with skewed masses).

    Dimensions beyond the first two are standard-normal noise.
    """
    if n < 4 or feature_dim < 2:
        raise ConfigurationError(f"need n >= 4 and feature_dim >= 2, got n={n}, feature_dim={feature_dim}")
    if task not in TASKS:
        raise ConfigurationError(f"unknown task {task!r}; choose from {TASKS}")
    if sigma < 0:
        raise ConfigurationError("sigma must be >= 0")
    rng = np.random.default_rng(seed)
    labels = _balanced_labels(n)
    X = np.empty((n, feature_dim))

    if task == "xor-blobs":
        # k-th member of each class alternates between that class's two clusters
        within = np.arange(n) // 2
        s1 = np.where(within % 2 == 0, 1.0, -1.0)
        s2 = np.where(labels == 0, s1, -s1)
        centers = np.column_stack([s1, s2])
    elif task == "rings":
        theta = rng.uniform(0.0, 2.0 * math.pi, size=n)
        radius = np.where(labels == 0, 1.0, 2.0)
        centers = np.column_stack([radius * np.cos(theta), radius * np.sin(theta)])
    else:
        if not 0.0 <= minor_fraction < 0.5:
            raise ConfigurationError("minor_fraction must lie in [0, 0.5)")
        minor = rng.random(n) < minor_fraction
        s1 = np.where(minor, -minor_offset, 1.0)
        s2 = np.where(labels == 0, 1.0, -1.0) * np.where(minor, -1.0, 1.0)
        centers = np.column_stack([s1, s2])

    X[:, :2] = centers + sigma * rng.standard_normal((n, 2))
    if feature_dim > 2:
        X[:, 2:] = rng.standard_normal((n, feature_dim - 2))
    return [Sample(i, X[i].copy(), int(labels[i])) for i in range(n)]


def split(samples: Sequence[Sample], fractions=DEFAULT_FRACTIONS, seed: int = 0) -> DatasetBundle:
    """Seeded shuffle followed by a contiguous cut into train/simulation/test.

    Simulation and test sizes are ``floor(fraction * n)``; the remainder goes to train.
    """
    fractions = tuple(float(f) for f in fractions)
    if len(fractions) != 3 or any(f < 0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
        raise ConfigurationError(f"split fractions must be three non-negative values summing to 1, got {fractions}")
    ids = [s.id for s in samples]
    if len(set(ids)) != len(ids):
        raise InvalidInputError("sample ids are not unique")
    n = len(samples)
    order = np.random.default_rng(seed).permutation(n)
    shuffled = [samples[i] for i in order]
    n_sim = math.floor(fractions[1] * n + 1e-9)
    n_test = math.floor(fractions[2] * n + 1e-9)
    n_train = n - n_sim - n_test

    def tag(group, name):
        return tuple(Sample(s.id, s.features, s.label, name) for s in group)

    dim = samples[0].features.shape[0] if samples else 0
    return DatasetBundle(
        train=tag(shuffled[:n_train], "train"),
        simulation=tag(shuffled[n_train:n_train + n_sim], "simulation"),
        test=tag(shuffled[n_train + n_sim:], "test"),
        feature_dim=dim,
        seed=seed,
    )


def load_csv(path) -> list[Sample]:
    """Read ``id,label,f1..fd`` rows.  A header-only file yields an empty list."""
    path = Path(path)
    samples: list[Sample] = []
    seen: set[int] = set()
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CSVParseError(f"{path}: missing header", 1) from None
        header = [h.strip() for h in header]
        if len(header) < 3 or header[:2] != ["id", "label"]:
            raise CSVParseError(f"{path}: header must start with id,label and name at least one feature", 1)
        width = len(header)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != width:
                raise CSVParseError(f"expected {width} fields, found {len(row)}", lineno)
            try:
                sid = int(row[0])
                label = int(row[1])
                feats = np.array([float(v) for v in row[2:]])
            except ValueError as exc:
                raise CSVParseError(str(exc), lineno) from None
            if label not in (0, 1):
                raise CSVParseError(f"label must be 0 or 1, got {label}", lineno)
            if not np.all(np.isfinite(feats)):
                raise CSVParseError("non-finite feature value", lineno)
            if sid in seen:
                raise InvalidInputError(f"{path}: duplicate id {sid} on line {lineno}")
            seen.add(sid)
            samples.append(Sample(sid, feats, label))
    return samples


def write_csv(path, samples: Sequence[Sample]) -> None:
    dim = samples[0].features.shape[0] if samples else 0
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "label"] + [f"f{i + 1}" for i in range(dim)])
        for s in samples:
            w.writerow([s.id, s.label] + [repr(float(v)) for v in s.features])
