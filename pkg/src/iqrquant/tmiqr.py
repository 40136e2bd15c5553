"""Token-maximums IQR clipping of activation tensors.

The clip threshold comes from the per-token (per-row) maximum absolute
activations, a set of only L values. With the Tukey fence
``t = q3 + iqr_scale * (q3 - q1)`` on that set, every element of the
L x H tensor is clamped to ``[-t, t]``. The cost is one O(N) pass for the row
maxima, an O(L log L) sort, and one O(N) clamp.

Quartiles use linear interpolation at fractional index ``p * (L - 1)``,
evaluated in float64. The clamp bound is the largest float32 not above ``t``,
so a token maximum that is ``<= t`` is never altered.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .tensor import DenseMatrix, elementwise_clamp

TUKEY_SCALE = 1.5

_F32_MAX = float(np.finfo(np.float32).max)


@dataclass(frozen=True)
class ClipThreshold:
    t: float
    q1: float
    q3: float
    iqr_scale: float = TUKEY_SCALE

    @property
    def bound(self) -> np.float32:
        """Largest float32 that does not exceed ``t``; the value actually clamped to."""
        return _float32_at_most(self.t)


def _float32_at_most(x: float) -> np.float32:
    if x >= _F32_MAX:
        return np.float32(_F32_MAX)
    f = np.float32(x)
    if float(f) > x:
        f = np.nextafter(f, np.float32(-np.inf))
    return f


def token_maxes(a: DenseMatrix) -> np.ndarray:
    """Per-row maximum absolute value, float32, length ``a.rows``."""
    m = np.maximum(a.data.max(axis=1), -a.data.min(axis=1))
    # folds any -0.0 into +0.0
    m += np.float32(0.0)
    return m


def quartiles(values) -> tuple[float, float]:
    """First and third quartiles by linear interpolation on the sorted values."""
    v = np.sort(np.asarray(values, dtype=np.float64).reshape(-1))
    if v.size == 0:
        raise ValueError("quartiles of an empty array are undefined")
    return _interp(v, 0.25), _interp(v, 0.75)


def _interp(v: np.ndarray, p: float) -> float:
    pos = p * (v.size - 1)
    lo = math.floor(pos)
    hi = min(lo + 1, v.size - 1)
    return float(v[lo] + (v[hi] - v[lo]) * (pos - lo))


def iqr_threshold(q1: float, q3: float, iqr_scale: float = TUKEY_SCALE) -> ClipThreshold:
    if q1 > q3:
        raise ValueError(f"q1 ({q1}) must not exceed q3 ({q3})")
    if not iqr_scale >= 0:
        raise ValueError(f"iqr_scale must be non-negative, got {iqr_scale}")
    return ClipThreshold(t=q3 + iqr_scale * (q3 - q1), q1=q1, q3=q3, iqr_scale=iqr_scale)


def tm_iqr_clip(a: DenseMatrix, iqr_scale: float = TUKEY_SCALE) -> tuple[DenseMatrix, ClipThreshold]:
    """Clip ``a`` to the TM-IQR threshold computed from ``a`` itself."""
    q1, q3 = quartiles(token_maxes(a))
    thr = iqr_threshold(q1, q3, iqr_scale)
    bound = thr.bound
    if bound == 0:
        # np.clip would leave -0.0 behind for negative inputs
        return DenseMatrix._trusted(np.zeros(a.shape, dtype=np.float32)), thr
    return elementwise_clamp(a, -bound, bound), thr


def reference_tm_iqr_clip(
    a: DenseMatrix, iqr_scale: float = TUKEY_SCALE
) -> tuple[DenseMatrix, ClipThreshold]:
    """Deliberately naive TM-IQR used as a test oracle.

    Materializes ``|a|``, fully sorts every row to read off its maximum, sorts
    the maxima with ``sorted`` and evaluates quartiles in plain Python floats.
    """
    absolute = np.abs(np.array(a.data, dtype=np.float32))
    maxima = sorted(float(row[-1]) for row in np.sort(absolute, axis=1))
    n = len(maxima)

    def at(p):
        pos = p * (n - 1)
        lo = int(pos)
        hi = lo + 1 if lo + 1 < n else lo
        return maxima[lo] + (maxima[hi] - maxima[lo]) * (pos - lo)

    q1, q3 = at(0.25), at(0.75)
    t = q3 + iqr_scale * (q3 - q1)
    thr = ClipThreshold(t=t, q1=q1, q3=q3, iqr_scale=iqr_scale)

    if t >= _F32_MAX:
        bound = _F32_MAX
    else:
        bits = struct.unpack("<I", struct.pack("<f", t))[0]
        if struct.unpack("<f", struct.pack("<I", bits))[0] > t:
            bits -= 1
        bound = struct.unpack("<f", struct.pack("<I", bits))[0]
    b = np.float32(bound)
    out = np.minimum(np.maximum(a.data, -b), b)
    return DenseMatrix._trusted(out.astype(np.float32)), thr
