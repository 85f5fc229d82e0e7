"""Ψ: per-pixel affine map, per-image standardization, ρ×ρ pooling to the node grid"""

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from ..config import PROJECTION_SEED
from ..core.grid import NodeGrid
from ..core.settings import EngineConfig
from ..errors import NonFiniteError, ShapeMismatchError
from ..features.pyramid import FeatureMap


@dataclass(frozen=True)
class Projection:
    """conv(1×1)-norm-pool layer for one level: weights d×d_t, bias d."""

    level: int
    weights: np.ndarray
    bias: np.ndarray
    epsilon: float
    pool_factor: int
    pool_mode: str = "average"

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.float64)
        bias = np.asarray(self.bias, dtype=np.float64).reshape(-1)
        if weights.ndim != 2 or bias.shape[0] != weights.shape[0]:
            raise ShapeMismatchError(
                f"projection {self.level}: weights {weights.shape} and bias {bias.shape} disagree"
            )
        if not (np.all(np.isfinite(weights)) and np.all(np.isfinite(bias))):
            raise NonFiniteError(f"projection {self.level} has non-finite parameters")
        if self.epsilon <= 0:
            raise ShapeMismatchError(f"projection {self.level}: epsilon must be positive")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "bias", bias)

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]


def default_projections(dims: Sequence[int], cfg: EngineConfig) -> List[Projection]:
    """Uniform[-1/√d_t, 1/√d_t] weights and zero bias, seeded per level."""
    projections = []
    for level, in_dim in enumerate(dims, start=1):
        rng = np.random.default_rng([PROJECTION_SEED, level])
        bound = 1.0 / np.sqrt(in_dim)
        projections.append(
            Projection(
                level=level,
                weights=rng.uniform(-bound, bound, size=(cfg.embed_dim, in_dim)),
                bias=np.zeros(cfg.embed_dim),
                epsilon=cfg.standardize_epsilon,
                pool_factor=cfg.downsample_factor,
                pool_mode=cfg.pool_mode,
            )
        )
    return projections


def standardize(values: np.ndarray, epsilon: float) -> np.ndarray:
    """Per-row (channel) standardization across pixels; zero-range rows map to 0."""
    mean = values.mean(axis=1, keepdims=True)
    std = values.std(axis=1, keepdims=True)
    out = (values - mean) / (std + epsilon)
    constant = np.ptp(values, axis=1) == 0
    out[constant] = 0.0
    return out


def pool(grid_values: np.ndarray, grid: NodeGrid, mode: str = "average") -> np.ndarray:
    """ρ×ρ stride-ρ pooling of (d, h, w) with edge replication for ragged borders."""
    dim, height, width = grid_values.shape
    rho = grid.downsample_factor
    padded_h, padded_w = grid.padded_shape()
    padded = np.pad(
        grid_values, ((0, 0), (0, padded_h - height), (0, padded_w - width)), mode="edge"
    )
    blocks = padded.reshape(dim, grid.height, rho, grid.width, rho)
    pooled = blocks.max(axis=(2, 4)) if mode == "max" else blocks.mean(axis=(2, 4))
    return pooled.reshape(dim, grid.count)


def project(features: FeatureMap, proj: Projection, grid: NodeGrid) -> np.ndarray:
    """
    Embed one feature level on the node grid.

    Returns:
        d×N embedding matrix, one column per node
    """
    if proj.in_dim != features.dim:
        raise ShapeMismatchError(
            f"level {features.level}: projection expects {proj.in_dim} channels, features have {features.dim}"
        )
    expected = NodeGrid.for_image(features.grid_height, features.grid_width, proj.pool_factor)
    if (expected.height, expected.width, expected.downsample_factor) != (
        grid.height, grid.width, grid.downsample_factor
    ):
        raise ShapeMismatchError(
            f"grid {grid.shape} with ρ={grid.downsample_factor} inconsistent with "
            f"{features.grid_height}x{features.grid_width} features and ρ={proj.pool_factor}"
        )

    mapped = proj.weights @ features.data + proj.bias[:, None]
    normalized = standardize(mapped, proj.epsilon)
    embedded = pool(
        normalized.reshape(proj.out_dim, features.grid_height, features.grid_width),
        grid,
        proj.pool_mode,
    )
    if not np.all(np.isfinite(embedded)):
        raise NonFiniteError(f"level {features.level} embedding is non-finite")
    return embedded
