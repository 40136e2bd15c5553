"""Independent, deliberately slow reference computations used only by tests."""

import math

import numpy as np


def scan_max_abs(arr):
    best = 0.0
    for v in np.asarray(arr, dtype=np.float32).ravel().tolist():
        best = max(best, abs(v))
    return best


def row_scan_max_abs(arr):
    return [max(abs(v) for v in row) for row in np.asarray(arr, dtype=np.float32).tolist()]


def int_gemm_bruteforce(a, b):
    """Exact int64 product via explicit rank-1 accumulation over k."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    for k in range(a.shape[1]):
        out += np.outer(a[:, k], b[k, :])
    return out


def gemm_f64(a, b):
    return np.asarray(a, dtype=np.float64) @ np.asarray(b, dtype=np.float64)


def gelu_scalar(x):
    return 0.5 * x * (1.0 + math.erf(x / math.sqrt(2.0)))


def median_time_ns(fn, reps, warmup=3):
    import time

    for _ in range(warmup):
        fn()
    times = []
    for _ in range(reps):
        t0 = time.perf_counter_ns()
        fn()
        times.append(time.perf_counter_ns() - t0)
    times.sort()
    return times[len(times) // 2]


def paired_median_ns(fa, fb, rounds):
    """Median runtimes of fa and fb, timed alternately so drift affects both."""
    ta, tb = [], []
    for _ in range(rounds):
        ta.append(median_time_ns(fa, 1, warmup=1))
        tb.append(median_time_ns(fb, 1, warmup=1))
    ta.sort()
    tb.sort()
    return ta[rounds // 2], tb[rounds // 2]


_WIDTH_RATIO_SCRIPT = """
import sys
import numpy as np
from iqrquant.tensor import DenseMatrix
from iqrquant.tmiqr import tm_iqr_clip
from tests.oracles import paired_median_ns

l, h, rounds, seed = map(int, sys.argv[1:])
rng = np.random.default_rng(seed)
a = DenseMatrix(rng.standard_normal((l, h)).astype(np.float32))
b = DenseMatrix(rng.standard_normal((l, 2 * h)).astype(np.float32))
small, large = paired_median_ns(lambda: tm_iqr_clip(a), lambda: tm_iqr_clip(b), rounds)
print(large / small)
"""


def clip_width_ratio(l, h, rounds=41, seed=0):
    """Runtime of tm_iqr_clip at width 2h over width h, in a fresh interpreter.

    The clip allocates one L x H output per call. Whether glibc serves that
    from reused heap or from fresh mmap pages (which fault on every call)
    depends on the allocation history of the process, so timing inside a long
    test session can swing the ratio anywhere from ~1.2 to ~3.3.
    """
    import pathlib
    import subprocess
    import sys

    root = pathlib.Path(__file__).resolve().parent.parent
    out = subprocess.run(
        [sys.executable, "-c", _WIDTH_RATIO_SCRIPT, str(l), str(h), str(rounds), str(seed)],
        cwd=root, capture_output=True, text=True, check=True,
    )
    return float(out.stdout)
