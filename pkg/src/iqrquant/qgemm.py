"""Integer GEMM on quantized codes, plus the float32 reference GEMM."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quantizer import QuantizedMatrix, qmax
from .tensor import DenseMatrix

INT32_MAX = 2**31 - 1
# every partial sum below this is an exactly representable float64 integer
_F64_EXACT = 2**53


class GemmConfigError(ValueError):
    """The requested accumulation width cannot hold the product exactly."""


@dataclass(frozen=True, eq=False)
class GemmResult:
    values: DenseMatrix
    accum: np.ndarray
    accum_bits: int = 32


def safe_inner_dim(bits: int = 8, accum_bits: int = 32) -> int:
    """Largest inner dimension whose worst-case dot product fits the signed accumulator."""
    return (2 ** (accum_bits - 1) - 1) // qmax(bits) ** 2


def gemm_f32(a: DenseMatrix, b: DenseMatrix) -> DenseMatrix:
    """Real matrix product, accumulated in float64 and rounded once to float32."""
    if a.cols != b.rows:
        raise ValueError(f"shape mismatch: {a.shape} @ {b.shape}")
    out = a.data.astype(np.float64) @ b.data.astype(np.float64)
    return DenseMatrix._trusted(out.astype(np.float32))


def int_matmul(a_codes: np.ndarray, b_codes: np.ndarray, accum_dtype=np.int32) -> np.ndarray:
    """Exact integer product of two code matrices.

    When the worst-case magnitude stays below 2**53 the product is computed by
    float64 BLAS; each partial sum is then an exactly representable integer, so
    the result is bit-identical to integer accumulation in any order.
    """
    k = a_codes.shape[1]
    peak = int(np.abs(a_codes).max(initial=0)) * int(np.abs(b_codes).max(initial=0)) * k
    if peak < _F64_EXACT:
        acc = a_codes.astype(np.float64) @ b_codes.astype(np.float64)
        return acc.astype(accum_dtype)
    return (a_codes.astype(np.int64) @ b_codes.astype(np.int64)).astype(accum_dtype)


def gemm_i8(a: QuantizedMatrix, b: QuantizedMatrix, *, wide_accum: bool = False) -> GemmResult:
    """Multiply two quantized matrices with exact integer accumulation.

    Both operands must share a bit width (8 in the normal path). Accumulation
    is 32-bit when ``k * qmax**2`` fits a signed int32; larger inner
    dimensions need ``wide_accum=True`` and accumulate in 64 bits.
    """
    if a.cols != b.rows:
        raise ValueError(f"shape mismatch: ({a.rows}, {a.cols}) @ ({b.rows}, {b.cols})")
    if a.bits != b.bits:
        raise ValueError(f"bit widths differ: {a.bits} vs {b.bits}")
    k = a.cols
    if k <= safe_inner_dim(a.bits, 32):
        accum_bits, dtype = 32, np.int32
    elif wide_accum:
        if k > safe_inner_dim(a.bits, 64):
            raise GemmConfigError(f"inner dimension {k} overflows even a 64-bit accumulator")
        accum_bits, dtype = 64, np.int64
    else:
        raise GemmConfigError(
            f"inner dimension {k} exceeds the int32-safe bound "
            f"{safe_inner_dim(a.bits, 32)} at {a.bits} bits; pass wide_accum=True"
        )
    acc = int_matmul(a.codes, b.codes, dtype)
    scale = a.step * b.step
    values = (acc * scale).astype(np.float32)
    return GemmResult(DenseMatrix._trusted(values), acc, accum_bits)
