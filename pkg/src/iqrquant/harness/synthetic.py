"""Seeded synthetic activations, outlier patterns and FFN weights.

All randomness comes from numpy's PCG64 generator. Each consumer draws from
its own stream, ``default_rng([seed, stream])``, so changing one kind of draw
never shifts another. Outputs are deterministic per seed within this package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..ffn import Activation, FfnWeights
from ..tensor import DenseMatrix

STREAM_INPUT = 0
STREAM_WEIGHTS = 1
STREAM_HIDDEN = 2


@dataclass(frozen=True)
class SyntheticSpec:
    l: int
    h: int
    seed: int = 0
    outlier_token_fraction: float = 0.0
    outlier_magnitude: float = 1.0
    base_distribution: str = "std_normal"

    def __post_init__(self):
        if self.l < 1 or self.h < 1:
            raise ValueError(f"l and h must be positive, got ({self.l}, {self.h})")
        if not 0.0 <= self.outlier_token_fraction <= 1.0:
            raise ValueError(f"outlier_token_fraction must be in [0, 1], got {self.outlier_token_fraction}")
        if not self.outlier_magnitude >= 1.0:
            raise ValueError(f"outlier_magnitude must be >= 1, got {self.outlier_magnitude}")
        if self.base_distribution != "std_normal":
            raise ValueError(f"unsupported base distribution {self.base_distribution!r}")


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([seed, stream])


def _outlier_tokens(rng: np.random.Generator, l: int, fraction: float) -> np.ndarray:
    count = math.floor(fraction * l)
    if count == 0:
        return np.empty(0, dtype=np.int64)
    return np.sort(rng.choice(l, size=count, replace=False))


def gen_synthetic(spec: SyntheticSpec) -> DenseMatrix:
    """Standard-normal L x H matrix with ``floor(fraction * L)`` rows scaled by the magnitude."""
    rng = _rng(spec.seed, STREAM_INPUT)
    a = rng.standard_normal((spec.l, spec.h), dtype=np.float32)
    rows = _outlier_tokens(rng, spec.l, spec.outlier_token_fraction)
    a[rows] *= np.float32(spec.outlier_magnitude)
    return DenseMatrix(a)


def hidden_outlier_gain(
    l: int, width: int, seed: int, fraction: float, magnitude: float
) -> DenseMatrix:
    """Multiplier for FF1 activations that plants one outlier channel per chosen token.

    ``floor(fraction * L)`` tokens are picked; in each, one uniformly chosen
    channel gets gain ``magnitude``. Every other entry is 1.
    """
    rng = _rng(seed, STREAM_HIDDEN)
    gain = np.ones((l, width), dtype=np.float32)
    rows = _outlier_tokens(rng, l, fraction)
    cols = rng.integers(0, width, size=rows.size)
    gain[rows, cols] = np.float32(magnitude)
    return DenseMatrix(gain)


def random_weights(h: int, seed: int = 0, activation: Activation = Activation.GELU) -> FfnWeights:
    """Gaussian FFN weights with variance-preserving fan-in scaling and small biases."""
    rng = _rng(seed, STREAM_WEIGHTS)
    w1 = rng.standard_normal((h, 4 * h), dtype=np.float32) / np.float32(math.sqrt(h))
    w2 = rng.standard_normal((4 * h, h), dtype=np.float32) / np.float32(math.sqrt(4 * h))
    b1 = np.float32(0.02) * rng.standard_normal(4 * h, dtype=np.float32)
    b2 = np.float32(0.02) * rng.standard_normal(h, dtype=np.float32)
    return FfnWeights(DenseMatrix(w1), b1, DenseMatrix(w2), b2, activation)
