"""Central finite-difference check of the analytic cascade and head gradients"""

from dataclasses import dataclass
from typing import Callable, List, Sequence

import numpy as np
import pandas as pd

from .. import config
from ..core.grid import NodeGrid
from ..core.settings import EngineConfig
from ..core.types import LabelMap, ScoreMap
from ..diffusion.cascade import CascadeParams
from ..seed.importance import ImportanceHead
from ..similarity.transitions import TransitionMatrix
from ..utils.logger import get_logger
from .parameters import pack, parameter_names, trainable_mask, unpack
from .trainer import TrainingInstance, instance_loss

logger = get_logger("train.gradcheck")

LossFn = Callable[[np.ndarray], float]


def relative_error(analytic: float, numerical: float) -> float:
    """|a − f| / max(1e-12, |a| + |f|)."""
    return abs(analytic - numerical) / max(1e-12, abs(analytic) + abs(numerical))


@dataclass(frozen=True)
class GradientEntry:
    name: str
    analytic: float
    numerical: float
    relative_error: float


@dataclass(frozen=True)
class GradientReport:
    """Per-parameter comparison, worst agreement first."""

    entries: List[GradientEntry]
    fd_epsilon: float

    @property
    def max_relative_error(self) -> float:
        return max((e.relative_error for e in self.entries), default=0.0)

    def passed(self, tol: float = config.GRADIENT_TOLERANCE) -> bool:
        return self.max_relative_error < tol

    def degraded(self, tol: float = 1e-3) -> bool:
        return self.max_relative_error > tol

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(e.name, e.analytic, e.numerical, e.relative_error) for e in self.entries],
            columns=["parameter", "analytic", "numerical", "relative_error"],
        )


def numerical_gradient(loss_fn: LossFn, theta: np.ndarray, eps: float) -> np.ndarray:
    """(L(θ + εe_i) − L(θ − εe_i)) / 2ε for every coordinate i."""
    theta = np.asarray(theta, dtype=np.float64)
    grad = np.zeros_like(theta)
    for i in range(theta.shape[0]):
        forward = theta.copy()
        backward = theta.copy()
        forward[i] += eps
        backward[i] -= eps
        grad[i] = (loss_fn(forward) - loss_fn(backward)) / (2.0 * eps)
    return grad


def compare_gradients(
    names: Sequence[str],
    analytic: np.ndarray,
    loss_fn: LossFn,
    theta: np.ndarray,
    eps: float,
) -> GradientReport:
    numerical = numerical_gradient(loss_fn, theta, eps)
    entries = [
        GradientEntry(name, float(a), float(f), relative_error(float(a), float(f)))
        for name, a, f in zip(names, analytic, numerical)
    ]
    entries.sort(key=lambda e: e.relative_error, reverse=True)
    return GradientReport(entries=entries, fd_epsilon=eps)


def grad_check(
    instance: TrainingInstance,
    params: CascadeParams,
    head: ImportanceHead,
    fd_epsilon: float,
    cfg: EngineConfig,
    train_cascade: bool = True,
    train_head: bool = True,
) -> GradientReport:
    """
    Compare instance_loss gradients against central differences.

    Only trainable scalars are perturbed; the rest stay at their given values.
    """
    stages, classes = cfg.num_stages, cfg.num_classes
    theta = pack(params, head)
    _, analytic = instance_loss(instance, params, head, cfg)

    keep = trainable_mask(stages, classes, train_cascade, train_head).astype(bool)
    index = np.flatnonzero(keep)
    names = [parameter_names(stages, classes)[i] for i in index]

    def loss_fn(subset: np.ndarray) -> float:
        full = theta.copy()
        full[index] = subset
        p, h = unpack(full, stages, classes)
        loss, _ = instance_loss(instance, p, h, cfg)
        return loss

    report = compare_gradients(names, analytic[index], loss_fn, theta[index], fd_epsilon)
    logger.info(
        f"Gradient check over {len(names)} parameter(s): "
        f"max relative error {report.max_relative_error:.3e} at ε={fd_epsilon}"
    )
    return report


def random_instance(
    side: int, classes: int, stages: int, seed: int = 0
) -> TrainingInstance:
    """Dense random x, random row-stochastic P_t and random labels on a side×side grid."""
    rng = np.random.default_rng(seed)
    grid = NodeGrid(side, side)
    n = grid.count
    transitions = []
    for level in range(1, stages + 1):
        raw = rng.random((n, n)) + 0.05
        transitions.append(TransitionMatrix(raw / raw.sum(axis=1, keepdims=True), level=level))
    x = ScoreMap(grid, rng.normal(size=(n, classes)))
    labels = LabelMap(grid, rng.integers(0, classes, size=n))
    return TrainingInstance(x=x, transitions=tuple(transitions), labels=labels)
