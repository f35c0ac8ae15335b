"""Backend selection for the dense kernels.

The compiled extension is used when importable.  Setting
``EDGEDISTILL_PURE_PYTHON=1`` forces the numpy fallback.

The compiled loops win on the small per-camera and per-round batches where
numpy's call overhead dominates; for large batches (test-set evaluation,
initial training) BLAS-backed numpy is faster, so calls are routed by row
count.  Routing depends only on the batch shape, so runs stay deterministic.
"""

import os

from . import _kernels_py

if os.environ.get("EDGEDISTILL_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND

# batches with at least this many rows go to numpy (measured crossovers, see benchmarks/)
LINEAR_ROW_CUTOFF = 512
MLP_ROW_CUTOFF = 32


def linear_forward(params, X, n_classes):
    impl = _impl if X.shape[0] < LINEAR_ROW_CUTOFF else _kernels_py
    return impl.linear_forward(params, X, n_classes)


def linear_backward(X, G, n_classes):
    impl = _impl if X.shape[0] < LINEAR_ROW_CUTOFF else _kernels_py
    return impl.linear_backward(X, G, n_classes)


def mlp_forward(params, X, hidden, n_classes, act):
    impl = _impl if X.shape[0] < MLP_ROW_CUTOFF else _kernels_py
    return impl.mlp_forward(params, X, hidden, n_classes, act)


def mlp_backward(params, X, G, hidden, n_classes, act):
    impl = _impl if X.shape[0] < MLP_ROW_CUTOFF else _kernels_py
    return impl.mlp_backward(params, X, G, hidden, n_classes, act)
