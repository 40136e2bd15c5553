"""Dense 2-D float32 container shared by the quantization, clipping and GEMM code."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


class ConstructionError(ValueError):
    """Raised when a matrix cannot be built from the supplied data."""


@dataclass(frozen=True, eq=False)
class DenseMatrix:
    """Row-major float32 matrix with every element finite.

    ``data`` is a read-only, C-contiguous ``(rows, cols)`` array. Rows are
    tokens and columns are hidden units when the matrix holds activations.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float32, order="C", copy=True)
        if arr.ndim != 2:
            raise ConstructionError(f"expected a 2-D array, got {arr.ndim}-D")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ConstructionError(f"rows and cols must be positive, got {arr.shape}")
        _check_finite(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def _trusted(cls, arr: np.ndarray) -> "DenseMatrix":
        # Skips copying and validation; callers guarantee a finite float32 C-array.
        obj = object.__new__(cls)
        arr.setflags(write=False)
        object.__setattr__(obj, "data", arr)
        return obj

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.data
        return self.data.astype(dtype)

    def __repr__(self) -> str:
        return f"DenseMatrix(rows={self.rows}, cols={self.cols})"


def _check_finite(arr: np.ndarray) -> None:
    bad = ~np.isfinite(arr)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise ConstructionError(f"non-finite at ({i},{j})")


def new_matrix(rows: int, cols: int, data: Sequence[float] | np.ndarray) -> DenseMatrix:
    """Build a ``rows x cols`` matrix where element (i, j) is ``data[i*cols + j]``."""
    flat = np.asarray(data, dtype=np.float32).reshape(-1)
    if rows < 1 or cols < 1:
        raise ConstructionError(f"rows and cols must be positive, got ({rows}, {cols})")
    if flat.size != rows * cols:
        raise ConstructionError(
            f"length mismatch: got {flat.size} values for a {rows}x{cols} matrix"
        )
    return DenseMatrix(flat.reshape(rows, cols))


def max_abs(m: DenseMatrix) -> float:
    """Largest absolute element value, 0.0 for an all-zero matrix."""
    # max/min avoid materializing |data|; negation of a float32 is exact
    return float(max(m.data.max(), -m.data.min(), 0.0))


def elementwise_clamp(m: DenseMatrix, lo: float, hi: float) -> DenseMatrix:
    """Return ``min(hi, max(lo, x))`` for every element.

    Bounds are applied in float32, so non-representable bounds round to the
    nearest float32 first.
    """
    if np.isnan(lo) or np.isnan(hi):
        raise ValueError("clamp bounds must not be NaN")
    if lo > hi:
        raise ValueError(f"lo ({lo}) must not exceed hi ({hi})")
    out = np.clip(m.data, np.float32(lo), np.float32(hi))
    return DenseMatrix._trusted(out)
