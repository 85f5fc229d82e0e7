"""Affinity W = ΨᵀΨ, row softmax P = softmax(W/τ), and the TMAT matrix container"""

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from scipy.special import softmax

from ..config import TRANSITION_MAGIC
from ..core.grid import NodeGrid
from ..core.settings import EngineConfig
from ..errors import BoundsError, MatrixFormatError, ShapeMismatchError
from ..features.pyramid import FeaturePyramid
from ..io.atomic import PathLike, atomic_write_bytes
from ..utils.logger import get_logger
from .projection import Projection, project

logger = get_logger("similarity.transitions")

_MATRIX_HEADER = struct.Struct("<2I")


@dataclass(frozen=True)
class AffinityMatrix:
    """Symmetric pairwise similarities W with degrees d_ii = Σ_j W_ij."""

    values: np.ndarray
    degrees: np.ndarray

    @property
    def size(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic N×N random-walk matrix of stage `level`."""

    values: np.ndarray
    level: int = 1

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ShapeMismatchError(f"transition matrix must be square, got {values.shape}")
        object.__setattr__(self, "values", values)

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def max_row_deviation(self) -> float:
        """max over rows of |row sum − 1|."""
        return float(np.max(np.abs(self.values.sum(axis=1) - 1.0)))

    def is_row_stochastic(self, tol: float = 1e-9) -> bool:
        return bool(
            np.all(self.values >= 0.0) and np.all(self.values <= 1.0)
            and self.max_row_deviation() <= tol
        )


def affinity(embeddings: np.ndarray, cfg: EngineConfig) -> AffinityMatrix:
    """W_ij = ⟨z_i, z_j⟩, divided by √d when affinity_scale is on."""
    z = np.asarray(embeddings, dtype=np.float64)
    w = z.T @ z
    if cfg.affinity_scale:
        w = w / np.sqrt(z.shape[0])
    w = 0.5 * (w + w.T)
    return AffinityMatrix(values=w, degrees=w.sum(axis=1))


def row_softmax(w: AffinityMatrix, temperature: float, level: int = 1) -> TransitionMatrix:
    """P_ij = exp(W_ij/τ − m_i) / Σ_j exp(W_ij/τ − m_i); softmax shifts by the row max."""
    if temperature <= 0:
        raise ShapeMismatchError(f"temperature must be positive, got {temperature}")
    return TransitionMatrix(values=softmax(w.values / temperature, axis=1), level=level)


def transition_for_level(
    pyramid: FeaturePyramid, proj: Projection, grid: NodeGrid, cfg: EngineConfig
) -> TransitionMatrix:
    fmap = pyramid.levels[proj.level - 1]
    embeddings = project(fmap, proj, grid)
    return row_softmax(affinity(embeddings, cfg), cfg.softmax_temperature, level=proj.level)


def build_transitions(
    pyramid: FeaturePyramid,
    projections: Sequence[Projection],
    grid: NodeGrid,
    cfg: EngineConfig,
    workers: Optional[int] = None,
) -> List[TransitionMatrix]:
    """
    Build P_1..P_T in stage order, one per pyramid level.

    Args:
        workers: Thread count for per-level construction (None = sequential)
    """
    pyramid.require_levels(cfg.num_stages)
    if len(projections) != len(pyramid):
        raise ShapeMismatchError(
            f"{len(projections)} projections for a {len(pyramid)}-level pyramid"
        )
    for t, proj in enumerate(projections, start=1):
        if proj.level != t:
            raise ShapeMismatchError(f"projection {t} is declared for level {proj.level}")

    def build(proj: Projection) -> TransitionMatrix:
        return transition_for_level(pyramid, proj, grid, cfg)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            transitions = list(pool.map(build, projections))
    else:
        transitions = [build(proj) for proj in projections]

    logger.debug(f"Built {len(transitions)} transition matrices of size {grid.count}")
    return transitions


def transition_row(p: TransitionMatrix, node: int, grid: NodeGrid) -> np.ndarray:
    """Row `node` of P laid out as an h'×w' heat grid."""
    if p.size != grid.count:
        raise ShapeMismatchError(f"{p.size}-node matrix on a {grid.count}-node grid")
    if not 0 <= node < p.size:
        raise BoundsError(f"node {node} out of range for {p.size}-node grid")
    return grid.reshape(p.values[node])


def encode_transition(p: TransitionMatrix) -> bytes:
    return (
        TRANSITION_MAGIC
        + _MATRIX_HEADER.pack(p.size, p.level)
        + p.values.astype("<f8").tobytes()
    )


def decode_transition(raw: bytes) -> TransitionMatrix:
    if raw[:4] != TRANSITION_MAGIC:
        raise MatrixFormatError(f"bad magic {raw[:4]!r}; expected {TRANSITION_MAGIC!r}")
    if len(raw) < 4 + _MATRIX_HEADER.size:
        raise MatrixFormatError("truncated matrix header")
    size, level = _MATRIX_HEADER.unpack_from(raw, 4)
    offset = 4 + _MATRIX_HEADER.size
    expected = 8 * size * size
    if len(raw) - offset != expected:
        raise MatrixFormatError(f"expected {expected} payload bytes, got {len(raw) - offset}")
    if size == 0:
        raise MatrixFormatError("matrix has no nodes")
    values = np.frombuffer(raw, dtype="<f8", count=size * size, offset=offset)
    if not np.all(np.isfinite(values)):
        raise MatrixFormatError(f"level {level} matrix contains non-finite values")
    p = TransitionMatrix(values=values.reshape(size, size).astype(np.float64), level=level)
    if not p.is_row_stochastic():
        raise MatrixFormatError(
            f"level {level} matrix is not row-stochastic "
            f"(max row deviation {p.max_row_deviation():.3e}, min entry {p.values.min():.3e})"
        )
    return p


def save_transition(path: PathLike, p: TransitionMatrix) -> Path:
    return atomic_write_bytes(path, encode_transition(p))


def load_transition(path: PathLike) -> TransitionMatrix:
    return decode_transition(Path(path).read_bytes())
