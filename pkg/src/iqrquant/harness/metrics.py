from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..tensor import DenseMatrix


class ErrorMetrics(NamedTuple):
    mse: float
    max_abs_err: float
    cosine_sim: float


def metrics(reference: DenseMatrix, candidate: DenseMatrix) -> ErrorMetrics:
    """MSE, max absolute error and cosine similarity of ``candidate`` against ``reference``.

    Computed in float64. Cosine similarity is 1.0 when both matrices are zero
    and 0.0 when exactly one is.
    """
    if reference.shape != candidate.shape:
        raise ValueError(f"shape mismatch: {reference.shape} vs {candidate.shape}")
    ref = reference.data.astype(np.float64).ravel()
    cand = candidate.data.astype(np.float64).ravel()
    diff = cand - ref
    mse = float(np.mean(diff * diff))
    max_err = float(np.max(np.abs(diff)))

    nr, nc = np.linalg.norm(ref), np.linalg.norm(cand)
    if max_err == 0.0:
        # identical inputs, including the all-zero pair; avoids 1 - eps from rounding
        cos = 1.0
    elif nr == 0 or nc == 0:
        cos = 0.0
    else:
        cos = float(np.clip(np.dot(ref, cand) / (nr * nc), -1.0, 1.0))
    return ErrorMetrics(mse, max_err, cos)
