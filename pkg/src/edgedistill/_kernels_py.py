"""Pure-numpy dense forward/backward kernels.

Reference backend, and the fallback when the compiled ``_kernels`` extension
is unavailable.  Parameter layouts:

* linear: ``W (C, D)`` row-major, then ``b (C)``
* mlp:    ``W1 (H, D)``, ``b1 (H)``, ``W2 (C, H)``, ``b2 (C)``

``act`` is 0 for relu and 1 for tanh.  ``G`` holds per-row loss gradients
with respect to the logits, already scaled by any sample weights.
"""

import numpy as np

BACKEND = "python"


def linear_forward(params, X, n_classes):
    D = X.shape[1]
    W = params[: n_classes * D].reshape(n_classes, D)
    b = params[n_classes * D:]
    return X @ W.T + b


def linear_backward(X, G, n_classes):
    return np.concatenate([(G.T @ X).ravel(), G.sum(axis=0)])


def _mlp_unpack(params, D, hidden, n_classes):
    o = 0
    W1 = params[o:o + hidden * D].reshape(hidden, D)
    o += hidden * D
    b1 = params[o:o + hidden]
    o += hidden
    W2 = params[o:o + n_classes * hidden].reshape(n_classes, hidden)
    o += n_classes * hidden
    b2 = params[o:o + n_classes]
    return W1, b1, W2, b2


def _hidden(W1, b1, X, act):
    pre = X @ W1.T + b1
    return pre, (np.maximum(pre, 0.0) if act == 0 else np.tanh(pre))


def mlp_forward(params, X, hidden, n_classes, act):
    W1, b1, W2, b2 = _mlp_unpack(params, X.shape[1], hidden, n_classes)
    _, A = _hidden(W1, b1, X, act)
    return A @ W2.T + b2


def mlp_backward(params, X, G, hidden, n_classes, act):
    W1, b1, W2, b2 = _mlp_unpack(params, X.shape[1], hidden, n_classes)
    pre, A = _hidden(W1, b1, X, act)
    dA = G @ W2
    if act == 0:
        dpre = dA * (pre > 0.0)
    else:
        dpre = dA * (1.0 - A * A)
    return np.concatenate([
        (dpre.T @ X).ravel(), dpre.sum(axis=0), (G.T @ A).ravel(), G.sum(axis=0),
    ])
