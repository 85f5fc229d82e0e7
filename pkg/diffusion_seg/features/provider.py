"""Pluggable feature providers and the FPYR pyramid container.

FPYR layout: magic b"FPYR", then per level a header of four little-endian
uint32 (level, d, h, w) followed by d·h·w little-endian float64 values.
"""

import struct
from pathlib import Path
from typing import Optional, Protocol

import numpy as np

from ..config import PYRAMID_MAGIC
from ..core.settings import EngineConfig
from ..core.types import Image
from ..errors import NonFiniteError, PyramidFormatError
from ..io.atomic import PathLike, atomic_write_bytes
from ..utils.logger import get_logger
from .pyramid import FeatureMap, FeaturePyramid, extract_pyramid

logger = get_logger("features.provider")

_LEVEL_HEADER = struct.Struct("<4I")


def encode_pyramid(pyramid: FeaturePyramid) -> bytes:
    chunks = [PYRAMID_MAGIC]
    for fmap in pyramid.levels:
        chunks.append(_LEVEL_HEADER.pack(fmap.level, fmap.dim, fmap.grid_height, fmap.grid_width))
        chunks.append(fmap.data.astype("<f8").tobytes())
    return b"".join(chunks)


def decode_pyramid(raw: bytes) -> FeaturePyramid:
    if raw[:4] != PYRAMID_MAGIC:
        raise PyramidFormatError(f"bad magic {raw[:4]!r}; expected {PYRAMID_MAGIC!r}")

    levels = []
    pos = 4
    while pos < len(raw):
        if len(raw) - pos < _LEVEL_HEADER.size:
            raise PyramidFormatError(f"truncated level header at byte {pos}")
        level, dim, height, width = _LEVEL_HEADER.unpack_from(raw, pos)
        pos += _LEVEL_HEADER.size
        count = dim * height * width
        if len(raw) - pos < 8 * count:
            raise PyramidFormatError(
                f"level {level}: expected {8 * count} payload bytes, got {len(raw) - pos}"
            )
        values = np.frombuffer(raw, dtype="<f8", count=count, offset=pos).astype(np.float64)
        pos += 8 * count
        if not np.all(np.isfinite(values)):
            raise NonFiniteError(f"level {level} contains non-finite values")
        levels.append(
            FeatureMap(level=level, grid_height=height, grid_width=width,
                       data=values.reshape(dim, height * width))
        )

    if not levels:
        raise PyramidFormatError("pyramid file holds no levels")
    return FeaturePyramid(tuple(levels))


def save_pyramid(path: PathLike, pyramid: FeaturePyramid) -> Path:
    return atomic_write_bytes(path, encode_pyramid(pyramid))


def load_pyramid(path: PathLike, cfg: EngineConfig) -> FeaturePyramid:
    """Read an FPYR file and check it against the configured stage count."""
    pyramid = decode_pyramid(Path(path).read_bytes())
    pyramid.require_levels(cfg.num_stages)
    logger.debug(f"Loaded {len(pyramid)}-level pyramid {pyramid.dims} from {path}")
    return pyramid


class FeatureProvider(Protocol):
    def pyramid(self, image: Optional[Image], cfg: EngineConfig) -> FeaturePyramid:
        ...


class HandcraftedProvider:
    """Computes the built-in five-level pyramid from the image."""

    def pyramid(self, image: Optional[Image], cfg: EngineConfig) -> FeaturePyramid:
        if image is None:
            raise PyramidFormatError("hand-crafted features need an input image")
        return extract_pyramid(image, cfg)


class FileProvider:
    """Serves a precomputed pyramid from an FPYR file."""

    def __init__(self, path: PathLike):
        self.path = Path(path)

    def pyramid(self, image: Optional[Image], cfg: EngineConfig) -> FeaturePyramid:
        pyramid = load_pyramid(self.path, cfg)
        if image is not None and pyramid.shape != (image.height, image.width):
            raise PyramidFormatError(
                f"pyramid resolution {pyramid.shape} does not match image {image.height}x{image.width}"
            )
        return pyramid
