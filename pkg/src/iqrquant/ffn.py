"""Transformer position-wise feed-forward block in FP32, I8 and TM-IQR modes."""

from __future__ import annotations

import enum
import threading
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from .qgemm import gemm_f32, gemm_i8, safe_inner_dim
from .quantizer import QuantizedMatrix, Rounding, quantize
from .tensor import DenseMatrix
from .tmiqr import TUKEY_SCALE, ClipThreshold, tm_iqr_clip


class Activation(enum.IntEnum):
    RELU = 0
    GELU = 1


class FfnMode(enum.Enum):
    FP32 = "fp32"
    I8 = "i8"
    TMIQR = "tmiqr"


def activation_fn(x, kind: Activation):
    """ReLU, or GELU in its exact erf form. Works on scalars and float arrays."""
    if kind == Activation.RELU:
        return np.maximum(x, 0)
    if kind == Activation.GELU:
        x = np.asarray(x)
        dtype = x.dtype if x.dtype.kind == "f" else np.float64
        half = dtype.type(0.5)
        return half * x * (1 + erf(x * dtype.type(1 / np.sqrt(2))))
    raise ValueError(f"unknown activation {kind!r}")


@dataclass(eq=False)
class FfnWeights:
    """W1 is H x 4H, W2 is 4H x H. Biases are float32 vectors.

    Quantized copies of W1/W2 are built on first use per (bits, rounding) and
    reused by every later forward call.
    """

    w1: DenseMatrix
    b1: np.ndarray
    w2: DenseMatrix
    b2: np.ndarray
    activation: Activation = Activation.GELU
    _qcache: dict = field(default_factory=dict, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def __post_init__(self):
        h = self.w1.rows
        if self.w1.cols != 4 * h:
            raise ValueError(f"w1 must be H x 4H, got {self.w1.shape}")
        if self.w2.shape != (4 * h, h):
            raise ValueError(f"w2 must be 4H x H = {(4 * h, h)}, got {self.w2.shape}")
        self.b1 = _bias(self.b1, 4 * h, "b1")
        self.b2 = _bias(self.b2, h, "b2")
        self.activation = Activation(self.activation)

    @property
    def hidden(self) -> int:
        return self.w1.rows

    def quantized(self, bits: int = 8, rounding: Rounding = "nearest") -> tuple[QuantizedMatrix, QuantizedMatrix]:
        key = (bits, rounding)
        with self._lock:
            if key not in self._qcache:
                self._qcache[key] = (
                    quantize(self.w1, bits, rounding),
                    quantize(self.w2, bits, rounding),
                )
            return self._qcache[key]


def _bias(b, n: int, name: str) -> np.ndarray:
    arr = np.array(b, dtype=np.float32).reshape(-1)
    if arr.size != n:
        raise ValueError(f"{name} must have length {n}, got {arr.size}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


def _qgemm(x: DenseMatrix, w: QuantizedMatrix, bits: int, rounding: Rounding) -> np.ndarray:
    qx = quantize(x, bits, rounding)
    wide = x.cols > safe_inner_dim(bits, 32)
    return gemm_i8(qx, w, wide_accum=wide).values.data


def _clip(h: DenseMatrix, iqr_scale: float, trace: dict | None, key: str):
    t0 = time.perf_counter_ns()
    clipped, thr = tm_iqr_clip(h, iqr_scale)
    if trace is not None:
        trace["clip_ns"] = trace.get("clip_ns", 0) + time.perf_counter_ns() - t0
        trace[key] = thr
    return clipped, thr


def ffn_forward(
    x: DenseMatrix,
    w: FfnWeights,
    mode: FfnMode,
    bits: int = 8,
    *,
    rounding: Rounding = "nearest",
    iqr_scale: float = TUKEY_SCALE,
    clip_ff1: bool = False,
    hidden_gain: DenseMatrix | None = None,
    trace: dict | None = None,
) -> tuple[DenseMatrix, ClipThreshold | None]:
    """Run ``act(x @ W1 + b1) @ W2 + b2``.

    Only the two GEMMs are quantized; bias and nonlinearity stay in float32.
    In TMIQR mode the FF2 input is passed through :func:`tm_iqr_clip` right
    before quantization and the threshold is returned. ``clip_ff1`` also clips
    the FF1 input (ablation only).

    ``hidden_gain`` multiplies the FF1 activations elementwise in every mode.
    It lets a benchmark plant outliers into the FF2 input. When ``trace`` is
    given it receives ``clip_ns``, the time spent inside the clipping calls.
    """
    mode = FfnMode(mode)
    if x.cols != w.hidden:
        raise ValueError(f"input has {x.cols} columns, weights expect H={w.hidden}")
    if hidden_gain is not None and hidden_gain.shape != (x.rows, 4 * w.hidden):
        raise ValueError(f"hidden_gain must be {(x.rows, 4 * w.hidden)}, got {hidden_gain.shape}")
    if trace is not None:
        trace["clip_ns"] = 0

    if mode is FfnMode.FP32:
        h = gemm_f32(x, w.w1).data
    else:
        if mode is FfnMode.TMIQR and clip_ff1:
            x, _ = _clip(x, iqr_scale, trace, "ff1_threshold")
        qw1, _ = w.quantized(bits, rounding)
        h = _qgemm(x, qw1, bits, rounding)

    h = h + w.b1
    h = activation_fn(h, w.activation).astype(np.float32, copy=False)
    if hidden_gain is not None:
        h *= hidden_gain.data
    hidden = DenseMatrix._trusted(h)

    threshold = None
    if mode is FfnMode.FP32:
        y = gemm_f32(hidden, w.w2).data
    else:
        if mode is FfnMode.TMIQR:
            hidden, threshold = _clip(hidden, iqr_scale, trace, "ff2_threshold")
        _, qw2 = w.quantized(bits, rounding)
        y = _qgemm(hidden, qw2, bits, rounding)

    return DenseMatrix._trusted(y + w.b2), threshold
