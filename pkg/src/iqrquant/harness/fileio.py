"""Little-endian binary formats for FFN weights and activation dumps.

Weight file (``QFFW``)::

    4s magic | u32 version=1 | u32 H | u8 activation (0=relu, 1=gelu)
    f32[H*4H] w1 | f32[4H] b1 | f32[4H*H] w2 | f32[H] b2

Activation dump (``QACT``)::

    4s magic | u32 version=1 | u32 L | u32 H | f32[L*H]

All arrays are row-major.
"""

from __future__ import annotations

import os
import struct

import numpy as np

from ..ffn import Activation, FfnWeights
from ..tensor import ConstructionError, DenseMatrix

WEIGHTS_MAGIC = b"QFFW"
ACTIVATIONS_MAGIC = b"QACT"
VERSION = 1

_WEIGHTS_HEADER = struct.Struct("<4sIIB")
_ACT_HEADER = struct.Struct("<4sIII")
_F32 = np.dtype("<f4")


class FormatError(Exception):
    """Base class for malformed weight or activation files."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


class BadMagicError(FormatError):
    pass


class VersionMismatchError(FormatError):
    pass


class TruncatedFileError(FormatError):
    pass


class ShapeMismatchError(FormatError):
    pass


def _write(path, header: bytes, arrays) -> None:
    with open(path, "wb") as f:
        f.write(header)
        for arr in arrays:
            f.write(np.ascontiguousarray(arr, dtype=_F32).tobytes())


def _read_header(path, raw: bytes, header: struct.Struct, magic: bytes):
    if len(raw) < 4 or raw[:4] != magic:
        if len(raw) < 4 and magic.startswith(raw):
            raise TruncatedFileError(path, "truncated header")
        raise BadMagicError(path, f"bad magic {raw[:4]!r}, expected {magic!r}")
    if len(raw) < header.size:
        raise TruncatedFileError(path, "truncated header")
    fields = header.unpack_from(raw)
    if fields[1] != VERSION:
        raise VersionMismatchError(path, f"unsupported version {fields[1]}, expected {VERSION}")
    return fields[2:]


def _payload(path, raw: bytes, offset: int, count: int) -> np.ndarray:
    expected = count * _F32.itemsize
    got = len(raw) - offset
    if got < expected:
        raise TruncatedFileError(path, f"truncated payload: {got} bytes, header implies {expected}")
    if got > expected:
        raise ShapeMismatchError(
            path, f"shape mismatch: {got} payload bytes, header implies {expected}"
        )
    return np.frombuffer(raw, dtype=_F32, count=count, offset=offset).astype(np.float32)


def save_weights(path: str | os.PathLike, w: FfnWeights) -> None:
    h = w.hidden
    header = _WEIGHTS_HEADER.pack(WEIGHTS_MAGIC, VERSION, h, int(w.activation))
    _write(path, header, [w.w1.data, w.b1, w.w2.data, w.b2])


def load_weights(path: str | os.PathLike) -> FfnWeights:
    with open(path, "rb") as f:
        raw = f.read()
    h, tag = _read_header(path, raw, _WEIGHTS_HEADER, WEIGHTS_MAGIC)
    if h == 0:
        raise ShapeMismatchError(path, "shape mismatch: H must be positive")
    try:
        activation = Activation(tag)
    except ValueError:
        raise FormatError(path, f"unknown activation tag {tag}") from None
    sizes = [h * 4 * h, 4 * h, 4 * h * h, h]
    flat = _payload(path, raw, _WEIGHTS_HEADER.size, sum(sizes))
    w1, b1, w2, b2 = np.split(flat, np.cumsum(sizes)[:-1])
    try:
        return FfnWeights(
            w1=DenseMatrix(w1.reshape(h, 4 * h)),
            b1=b1,
            w2=DenseMatrix(w2.reshape(4 * h, h)),
            b2=b2,
            activation=activation,
        )
    except (ConstructionError, ValueError) as exc:
        raise FormatError(path, f"invalid payload: {exc}") from None


def save_activations(path: str | os.PathLike, a: DenseMatrix) -> None:
    header = _ACT_HEADER.pack(ACTIVATIONS_MAGIC, VERSION, a.rows, a.cols)
    _write(path, header, [a.data])


def load_activations(path: str | os.PathLike) -> DenseMatrix:
    with open(path, "rb") as f:
        raw = f.read()
    rows, cols = _read_header(path, raw, _ACT_HEADER, ACTIVATIONS_MAGIC)
    if rows == 0 or cols == 0:
        raise ShapeMismatchError(path, f"shape mismatch: empty shape ({rows}, {cols})")
    flat = _payload(path, raw, _ACT_HEADER.size, rows * cols)
    try:
        return DenseMatrix(flat.reshape(rows, cols))
    except ConstructionError as exc:
        raise FormatError(path, f"invalid payload: {exc}") from None
