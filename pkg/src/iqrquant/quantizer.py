"""Symmetric uniform b-bit quantization with a single per-tensor scale.

The scale ``qs`` is the largest absolute value of the tensor. Codes live in
``[-(2**(b-1) - 1), 2**(b-1) - 1]``, so for 8 bits the range is +-127 and the
grid is symmetric around zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .tensor import DenseMatrix, max_abs

Rounding = Literal["nearest", "floor"]

MIN_BITS = 2
MAX_BITS = 16


def qmax(bits: int) -> int:
    return 2 ** (bits - 1) - 1


def _check_bits(bits: int) -> None:
    if not (MIN_BITS <= bits <= MAX_BITS):
        raise ValueError(f"bits must be in [{MIN_BITS}, {MAX_BITS}], got {bits}")


@dataclass(frozen=True, eq=False)
class QuantizedMatrix:
    """Integer codes plus the scale needed to map them back to reals.

    ``codes`` is int8 for ``bits <= 8`` and int16 otherwise. ``qs`` is zero only
    for an all-zero source, in which case every code is zero.
    """

    codes: np.ndarray
    qs: float
    bits: int

    @property
    def rows(self) -> int:
        return self.codes.shape[0]

    @property
    def cols(self) -> int:
        return self.codes.shape[1]

    @property
    def step(self) -> float:
        """Real value of one code unit."""
        return self.qs / qmax(self.bits)


def compute_qs(m: DenseMatrix) -> float:
    return max_abs(m)


def _round_half_away(x: np.ndarray) -> np.ndarray:
    whole = np.trunc(x)
    # x - trunc(x) is exact, so ties are detected without the floor(|x|+0.5) pitfall
    frac = x - whole
    whole += np.where(np.abs(frac) >= 0.5, np.sign(x), 0.0)
    return whole


def quantize(m: DenseMatrix, bits: int = 8, rounding: Rounding = "nearest") -> QuantizedMatrix:
    """Map ``m`` onto signed integer codes using its own max-abs scale.

    ``rounding="nearest"`` rounds half away from zero. ``rounding="floor"``
    truncates toward zero, which keeps the grid odd-symmetric.
    """
    _check_bits(bits)
    if rounding not in ("nearest", "floor"):
        raise ValueError(f"unknown rounding mode {rounding!r}")
    dtype = np.int8 if bits <= 8 else np.int16
    qs = compute_qs(m)
    if qs == 0.0:
        return QuantizedMatrix(np.zeros(m.shape, dtype=dtype), 0.0, bits)

    limit = qmax(bits)
    scaled = m.data.astype(np.float64)
    scaled *= limit / qs
    codes = _round_half_away(scaled) if rounding == "nearest" else np.trunc(scaled)
    np.clip(codes, -limit, limit, out=codes)
    return QuantizedMatrix(codes.astype(dtype), qs, bits)


def dequantize(q: QuantizedMatrix) -> DenseMatrix:
    out = q.codes.astype(np.float64) * q.qs / qmax(q.bits)
    return DenseMatrix._trusted(out.astype(np.float32))
