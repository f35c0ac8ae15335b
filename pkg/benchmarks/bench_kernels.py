"""Compare the compiled and numpy kernel backends on the shapes the simulator uses.

Run with ``python3 benchmarks/bench_kernels.py``.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from edgedistill import _kernels_py

try:
    from edgedistill import _kernels as _compiled
except ImportError:
    _compiled = None

# (label, rows, input dim, hidden units)
SHAPES = [
    ("one camera batch", 16, 32, 16),
    ("round uploads", 48, 32, 16),
    ("test set", 576, 32, 16),
    ("teacher training", 2304, 32, 16),
]


def bench(impl, n, d, h, repeat):
    rng = np.random.default_rng(0)
    X = rng.normal(size=(n, d))
    G = rng.normal(size=(n, 2))
    lin = rng.normal(size=2 * d + 2)
    mlp = rng.normal(size=h * d + h + 2 * h + 2)
    calls = {
        "linear fwd": lambda: impl.linear_forward(lin, X, 2),
        "linear bwd": lambda: impl.linear_backward(X, G, 2),
        "mlp fwd": lambda: impl.mlp_forward(mlp, X, h, 2, 0),
        "mlp bwd": lambda: impl.mlp_backward(mlp, X, G, h, 2, 0),
    }
    return {k: min(timeit.repeat(f, number=repeat, repeat=5)) / repeat for k, f in calls.items()}


_E2E = """
import time
from edgedistill import kernels
if {force_compiled}:
    kernels.LINEAR_ROW_CUTOFF = kernels.MLP_ROW_CUTOFF = 10**9
from edgedistill.config import RunConfig
from edgedistill.experiment import prepare, sweep
t0 = time.perf_counter()
cfg = RunConfig()
prepared = prepare(cfg)
t1 = time.perf_counter()
sweep(cfg, [0.1, 0.2, 0.3], prepared)
print(f"{{kernels.BACKEND}} {{t1 - t0:.3f}} {{time.perf_counter() - t1:.3f}}")
"""


def end_to_end():
    """Seed-0 default pipeline (initial training plus an 8-run sweep) in fresh interpreters."""
    modes = [("numpy only", {"EDGEDISTILL_PURE_PYTHON": "1"}, False),
             ("compiled, routed by size", {}, False),
             ("compiled only", {}, True)]
    print(f"\n{'end-to-end mode':<28}{'training (s)':>14}{'sweep (s)':>12}")
    for label, env, force in modes:
        if force and _compiled is None:
            continue
        out = subprocess.run([sys.executable, "-c", _E2E.format(force_compiled=force)],
                             env={**os.environ, **env}, capture_output=True, text=True, check=True)
        _, train_s, sweep_s = out.stdout.split()
        print(f"{label:<28}{float(train_s):>14.3f}{float(sweep_s):>12.3f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--skip-e2e", action="store_true", help="kernel timings only")
    args = ap.parse_args()
    backends = [("numpy", _kernels_py)] + ([("cython", _compiled)] if _compiled else [])
    if _compiled is None:
        print("compiled extension not built; timing the numpy backend only")
    print(f"{'shape':<18}{'kernel':<12}" + "".join(f"{name + ' (us)':>14}" for name, _ in backends)
          + ("   speedup" if _compiled else ""))
    for label, n, d, h in SHAPES:
        timings = [bench(impl, n, d, h, args.repeat) for _, impl in backends]
        for kernel in timings[0]:
            cells = "".join(f"{t[kernel] * 1e6:>14.2f}" for t in timings)
            speed = f"{timings[0][kernel] / timings[1][kernel]:>9.2f}x" if _compiled else ""
            print(f"{label:<18}{kernel:<12}{cells}{speed}")
    if not args.skip_e2e:
        end_to_end()


if __name__ == "__main__":
    main()
