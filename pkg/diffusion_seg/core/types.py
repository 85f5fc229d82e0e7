"""Value types shared by every module: images, score maps and label maps"""

from dataclasses import dataclass

import numpy as np

from ..config import IGNORE_LABEL
from ..errors import NonFiniteError, ShapeMismatchError
from .grid import NodeGrid


@dataclass(frozen=True)
class Image:
    """Channel-major image with values in [0, 1]; data has shape (c, h, w)."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 3:
            raise ShapeMismatchError(f"image data must be (c, h, w), got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise NonFiniteError("image contains non-finite values")
        if data.size and (data.min() < 0.0 or data.max() > 1.0):
            raise NonFiniteError("image values must lie in [0, 1]")
        object.__setattr__(self, "data", data)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class ScoreMap:
    """N×K real scores on a node grid (score map x, seed s, or prediction y)."""

    grid: NodeGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != self.grid.count:
            raise ShapeMismatchError(
                f"score map must be {self.grid.count}xK, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise NonFiniteError("score map contains non-finite values")
        object.__setattr__(self, "values", values)

    @property
    def classes(self) -> int:
        return self.values.shape[1]

    @classmethod
    def zeros(cls, grid: NodeGrid, classes: int) -> "ScoreMap":
        return cls(grid, np.zeros((grid.count, classes)))

    def require_compatible(self, other: "ScoreMap") -> None:
        if self.grid != other.grid or self.values.shape != other.values.shape:
            raise ShapeMismatchError(
                f"score maps disagree: {self.values.shape} on {self.grid.shape} "
                f"vs {other.values.shape} on {other.grid.shape}"
            )


@dataclass(frozen=True)
class LabelMap:
    """One class id per node; IGNORE_LABEL marks unlabeled nodes."""

    grid: NodeGrid
    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if labels.shape[0] != self.grid.count:
            raise ShapeMismatchError(
                f"label map must have {self.grid.count} entries, got {labels.shape[0]}"
            )
        object.__setattr__(self, "labels", labels)

    def valid_mask(self) -> np.ndarray:
        return self.labels != IGNORE_LABEL

    def require_classes(self, classes: int) -> None:
        bad = self.labels[self.valid_mask() & ((self.labels < 0) | (self.labels >= classes))]
        if bad.size:
            raise ShapeMismatchError(
                f"label {int(bad[0])} outside [0, {classes}) and not the ignore label"
            )
