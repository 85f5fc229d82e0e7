"""Seed branch head: importance map M = H(x), seed s = Mx, influence map E"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit

from ..core.grid import NodeGrid
from ..core.types import ScoreMap
from ..errors import NonFiniteError, ShapeMismatchError

WINDOW = 3


@dataclass(frozen=True)
class ImportanceHead:
    """3×3 local linear layer over K channels followed by a logistic.

    weights[k·9 + 3·dy + dx] multiplies channel k at offset (dy − 1, dx − 1).
    """

    weights: np.ndarray
    bias: float = 0.0

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if weights.shape[0] % (WINDOW * WINDOW):
            raise ShapeMismatchError(f"head weights must be K·9 long, got {weights.shape[0]}")
        if not (np.all(np.isfinite(weights)) and np.isfinite(self.bias)):
            raise NonFiniteError("importance head has non-finite parameters")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "bias", float(self.bias))

    @property
    def classes(self) -> int:
        return self.weights.shape[0] // (WINDOW * WINDOW)

    @classmethod
    def zeros(cls, classes: int) -> "ImportanceHead":
        """Untrained head: M ≡ 0.5."""
        return cls(np.zeros(classes * WINDOW * WINDOW), 0.0)


@dataclass(frozen=True)
class ImportanceMap:
    """Diagonal of M, one value in [0, 1] per node."""

    grid: NodeGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if values.shape[0] != self.grid.count:
            raise ShapeMismatchError(f"importance map needs {self.grid.count} values, got {values.shape[0]}")
        if np.any(values < 0.0) or np.any(values > 1.0) or not np.all(np.isfinite(values)):
            raise NonFiniteError("importance values must lie in [0, 1]")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class InfluenceMap:
    grid: NodeGrid
    values: np.ndarray


def neighborhoods(x: ScoreMap, grid: NodeGrid) -> np.ndarray:
    """N×(K·9) matrix of edge-replicated 3×3 neighborhoods, laid out like head weights."""
    if x.grid != grid:
        raise ShapeMismatchError("score map grid differs from the requested grid")
    padded = np.pad(grid.reshape(x.values), ((1, 1), (1, 1), (0, 0)), mode="edge")
    windows = sliding_window_view(padded, (WINDOW, WINDOW), axis=(0, 1))
    return windows.reshape(grid.count, x.classes * WINDOW * WINDOW)


def importance(x: ScoreMap, head: ImportanceHead, grid: NodeGrid) -> ImportanceMap:
    """M_ii = logistic(Σ_{3×3, k} w·x + b)."""
    if head.classes != x.classes:
        raise ShapeMismatchError(f"head built for {head.classes} classes, score map has {x.classes}")
    pre_activation = neighborhoods(x, grid) @ head.weights + head.bias
    return ImportanceMap(grid, expit(pre_activation))


def importance_backward(
    x: ScoreMap, head: ImportanceHead, grid: NodeGrid, dl_dm: np.ndarray
) -> Tuple[np.ndarray, float]:
    """Chain dL/dM through the logistic into (dL/dweights, dL/dbias)."""
    patches = neighborhoods(x, grid)
    m = expit(patches @ head.weights + head.bias)
    g = np.asarray(dl_dm) * m * (1.0 - m)
    return patches.T @ g, float(g.sum())


def make_seed(x: ScoreMap, m: ImportanceMap) -> ScoreMap:
    """s = Mx with M diagonal: s_{i,k} = M_ii·x_{i,k}."""
    if x.grid != m.grid:
        raise ShapeMismatchError(f"score map grid {x.grid.shape} differs from importance grid {m.grid.shape}")
    return ScoreMap(x.grid, m.values[:, None] * x.values)


def influence(x: ScoreMap) -> InfluenceMap:
    """E_i = Σ_k |x_{i,k}|."""
    return InfluenceMap(x.grid, np.abs(x.values).sum(axis=1))
