"""Dynamic int8 quantization with token-maximums IQR activation clipping."""

from .ffn import Activation, FfnMode, FfnWeights, activation_fn, ffn_forward
from .qgemm import GemmConfigError, GemmResult, gemm_f32, gemm_i8
from .quantizer import QuantizedMatrix, compute_qs, dequantize, quantize
from .tensor import ConstructionError, DenseMatrix, elementwise_clamp, max_abs, new_matrix
from .tmiqr import (
    ClipThreshold,
    iqr_threshold,
    quartiles,
    reference_tm_iqr_clip,
    tm_iqr_clip,
    token_maxes,
)

__all__ = [
    "Activation",
    "ClipThreshold",
    "ConstructionError",
    "DenseMatrix",
    "FfnMode",
    "FfnWeights",
    "GemmConfigError",
    "GemmResult",
    "QuantizedMatrix",
    "activation_fn",
    "compute_qs",
    "dequantize",
    "elementwise_clamp",
    "ffn_forward",
    "gemm_f32",
    "gemm_i8",
    "iqr_threshold",
    "max_abs",
    "new_matrix",
    "quantize",
    "quartiles",
    "reference_tm_iqr_clip",
    "tm_iqr_clip",
    "token_maxes",
]
