"""Feature pyramid types and the built-in hand-crafted extractor"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from ..config import DESCRIPTOR_WINDOWS
from ..core.settings import EngineConfig
from ..core.types import Image
from ..errors import DescriptorWindowError, NonFiniteError, ShapeMismatchError
from ..utils.logger import get_logger
from . import descriptors

logger = get_logger("features.pyramid")

BUILTIN_LEVELS = 5


@dataclass(frozen=True)
class FeatureMap:
    """Level-t features at full image resolution; data has shape (d_t, h·w)."""

    level: int
    grid_height: int
    grid_width: int
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim == 3:
            data = data.reshape(data.shape[0], -1)
        if data.ndim != 2 or data.shape[1] != self.grid_height * self.grid_width:
            raise ShapeMismatchError(
                f"level {self.level}: expected (d, {self.grid_height * self.grid_width}) "
                f"features, got {data.shape}"
            )
        if not np.all(np.isfinite(data)):
            raise NonFiniteError(f"level {self.level} features contain non-finite values")
        object.__setattr__(self, "data", data)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def as_grid(self) -> np.ndarray:
        return self.data.reshape(self.dim, self.grid_height, self.grid_width)


@dataclass(frozen=True)
class FeaturePyramid:
    """Ordered levels 1..T sharing one image resolution."""

    levels: Tuple[FeatureMap, ...]

    def __post_init__(self):
        levels = tuple(self.levels)
        if not levels:
            raise ShapeMismatchError("feature pyramid needs at least one level")
        for t, fmap in enumerate(levels, start=1):
            if fmap.level != t:
                raise ShapeMismatchError(f"pyramid entry {t} carries level {fmap.level}")
            if (fmap.grid_height, fmap.grid_width) != (levels[0].grid_height, levels[0].grid_width):
                raise ShapeMismatchError(f"level {t} resolution differs from level 1")
        object.__setattr__(self, "levels", levels)

    def __len__(self) -> int:
        return len(self.levels)

    def __getitem__(self, index: int) -> FeatureMap:
        return self.levels[index]

    @property
    def dims(self) -> List[int]:
        return [fmap.dim for fmap in self.levels]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.levels[0].grid_height, self.levels[0].grid_width

    def require_levels(self, count: int) -> None:
        if len(self.levels) != count:
            raise ShapeMismatchError(
                f"pyramid has {len(self.levels)} levels, configuration expects {count}"
            )


def expected_dims(channels: int, cfg: EngineConfig) -> List[int]:
    """Declared d_t of the built-in levels for a c-channel image."""
    return [channels + 2, 2 * channels, 5, channels, cfg.kmeans_clusters]


def extract_pyramid(image: Image, cfg: EngineConfig) -> FeaturePyramid:
    """
    Build the five-level hand-crafted pyramid.

    Levels: colour+position, 3×3 statistics, gradient histogram, 15×15 context,
    colour-position cluster assignments.
    """
    if cfg.num_stages != BUILTIN_LEVELS:
        raise ShapeMismatchError(
            f"built-in extractor produces {BUILTIN_LEVELS} levels, configuration asks for {cfg.num_stages}"
        )
    window = DESCRIPTOR_WINDOWS["context"]
    if image.height < window or image.width < window:
        raise DescriptorWindowError(
            f"image {image.height}x{image.width} smaller than the {window}x{window} descriptor window"
        )

    data = image.data
    raw_levels = [
        descriptors.color_position(data),
        descriptors.local_statistics(data),
        descriptors.gradient_histogram(data),
        descriptors.context_average(data),
        descriptors.cluster_assignments(
            data, cfg.kmeans_clusters, cfg.kmeans_iterations, cfg.position_weight
        ),
    ]

    levels = tuple(
        FeatureMap(level=t, grid_height=image.height, grid_width=image.width, data=values)
        for t, values in enumerate(raw_levels, start=1)
    )
    logger.debug(f"Extracted pyramid with dims {[f.dim for f in levels]} for {image.height}x{image.width} image")
    return FeaturePyramid(levels)
