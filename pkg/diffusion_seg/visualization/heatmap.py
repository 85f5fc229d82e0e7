"""Grayscale heatmap encoding of node grids as binary PGM"""

from pathlib import Path

import numpy as np

from ..config import HEATMAP_MAXVAL
from ..errors import NonFiniteError
from ..io.atomic import PathLike, atomic_write_bytes
from ..io.netpbm import encode_netpbm, read_pgm


def quantize(values: np.ndarray) -> np.ndarray:
    """Min-max normalize to 0..255; a constant grid maps to all zeros."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise NonFiniteError(f"heatmap needs a 2-D grid, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise NonFiniteError("heatmap values must be finite")
    lo, hi = values.min(), values.max()
    if hi == lo:
        return np.zeros(values.shape, dtype=np.uint8)
    scaled = (values - lo) / (hi - lo) * HEATMAP_MAXVAL
    return np.rint(scaled).astype(np.uint8)


def encode_heatmap(values: np.ndarray) -> bytes:
    return encode_netpbm(quantize(values))


def write_heatmap(path: PathLike, values: np.ndarray) -> Path:
    return atomic_write_bytes(path, encode_heatmap(values))


def decode_heatmap(path: PathLike) -> np.ndarray:
    return read_pgm(path)
