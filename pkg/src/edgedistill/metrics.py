"""Accuracy, relative accuracy and upload proportion."""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError, UndefinedMetricError


def accuracy(predictions, labels) -> float:
    pred = np.asarray(predictions)
    lab = np.asarray(labels)
    if pred.shape != lab.shape:
        raise InvalidInputError("predictions and labels differ in length")
    if pred.size == 0:
        raise UndefinedMetricError("accuracy of an empty set")
    return float(np.count_nonzero(pred == lab)) / pred.size


def relative_accuracy(edge_acc: float, framework_acc: float) -> float:
    if framework_acc <= 0:
        raise UndefinedMetricError("relative accuracy undefined when framework accuracy is 0")
    return edge_acc / framework_acc


def upload_proportion(total_uploads: int, total_samples: int) -> float:
    if total_samples <= 0:
        raise InvalidInputError("upload proportion needs at least one sample")
    if not 0 <= total_uploads <= total_samples:
        raise InvalidInputError(f"uploads ({total_uploads}) must lie in [0, {total_samples}]")
    return total_uploads / total_samples
