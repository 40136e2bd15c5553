"""Randomized equivalence check of tm_iqr_clip against the naive reference."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..tensor import DenseMatrix
from ..tmiqr import reference_tm_iqr_clip, tm_iqr_clip

VERIFY_LS = (1, 2, 7, 8, 512)
VERIFY_HS = (1, 64, 1024)
KINDS = ("normal", "contaminated", "constant_rows", "zeros", "ties", "sparse_zero")


@dataclass
class VerifyResult:
    checked: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def make_tensor(rng: np.random.Generator, l: int, h: int, kind: str) -> np.ndarray:
    if kind == "normal":
        return rng.standard_normal((l, h), dtype=np.float32) * np.float32(rng.uniform(0.01, 100))
    if kind == "contaminated":
        a = rng.standard_normal((l, h), dtype=np.float32)
        n = rng.integers(0, max(1, l // 4) + 1)
        rows = rng.choice(l, size=min(n, l), replace=False)
        a[rows] *= np.float32(10.0 ** rng.uniform(1, 6))
        return a
    if kind == "constant_rows":
        return np.repeat(rng.standard_normal((l, 1), dtype=np.float32), h, axis=1)
    if kind == "zeros":
        return np.zeros((l, h), dtype=np.float32)
    if kind == "ties":
        return rng.integers(-3, 4, size=(l, h)).astype(np.float32)
    if kind == "sparse_zero":
        # most rows zero: drives the threshold to 0
        a = np.zeros((l, h), dtype=np.float32)
        a[rng.integers(0, l)] = rng.standard_normal(h, dtype=np.float32)
        return a
    raise ValueError(kind)


def _same(x: np.ndarray, y: np.ndarray) -> bool:
    return x.shape == y.shape and np.array_equal(x.view(np.uint32), y.view(np.uint32))


def verify(count: int = 1000, seed: int = 0, iqr_scale: float = 1.5) -> VerifyResult:
    """Compare outputs and thresholds bit-for-bit over ``count`` tensors.

    Tensors cycle through every (L, H, kind) combination, so edge shapes get
    covered on every run of at least ``len(VERIFY_LS) * len(VERIFY_HS) * len(KINDS)``.
    """
    rng = np.random.default_rng(seed)
    combos = itertools.cycle(itertools.product(VERIFY_LS, VERIFY_HS, KINDS))
    result = VerifyResult()
    for i in range(count):
        l, h, kind = next(combos)
        a = DenseMatrix(make_tensor(rng, l, h, kind))
        out, thr = tm_iqr_clip(a, iqr_scale)
        ref_out, ref_thr = reference_tm_iqr_clip(a, iqr_scale)
        result.checked += 1
        if thr != ref_thr:
            result.failures.append(f"#{i} L={l} H={h} {kind}: threshold {thr} != {ref_thr}")
        elif not _same(out.data, ref_out.data):
            result.failures.append(f"#{i} L={l} H={h} {kind}: clipped tensors differ")
    return result
