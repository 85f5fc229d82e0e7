"""Desk-scale learning of cascade parameters and the importance head"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .. import config
from ..core.grid import NodeGrid
from ..core.settings import EngineConfig
from ..core.types import Image, LabelMap, ScoreMap
from ..diffusion.cascade import CascadeParams, run_cascade
from ..errors import NonFiniteError, ShapeMismatchError, TrainingDivergedError
from ..features.pyramid import FeaturePyramid, extract_pyramid
from ..seed.importance import ImportanceHead, importance, make_seed
from ..seed.seeds import SparseSeeds, rasterize_seeds
from ..similarity.projection import default_projections
from ..similarity.transitions import TransitionMatrix, build_transitions
from ..utils.logger import get_logger
from .backward import SeedInputs, backward_cascade
from .loss import cross_entropy
from .parameters import pack, trainable_mask, unpack

logger = get_logger("train.trainer")


class TrainConfig(BaseModel):
    """Optimizer settings; a zero learning rate freezes every parameter."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    learning_rate: float = Field(default=config.DEFAULT_LEARNING_RATE, ge=0)
    epochs: int = Field(default=config.DEFAULT_EPOCHS, ge=1)
    momentum: float = Field(default=config.DEFAULT_MOMENTUM, ge=0, lt=1)
    fd_epsilon: float = Field(default=config.DEFAULT_FD_EPSILON, gt=0)
    train_cascade: bool = True
    train_head: bool = True
    workers: int = Field(default=1, ge=1)


@dataclass(frozen=True)
class TrainingInstance:
    """One dataset item with its frozen transition matrices."""

    x: ScoreMap
    transitions: Tuple[TransitionMatrix, ...]
    labels: LabelMap

    @property
    def grid(self) -> NodeGrid:
        return self.x.grid


@dataclass
class FitResult:
    params: CascadeParams
    head: ImportanceHead
    history: List[float] = field(default_factory=list)


DatasetItem = Tuple[Union[Image, FeaturePyramid], SparseSeeds, LabelMap]


def prepare_instance(item: DatasetItem, cfg: EngineConfig) -> TrainingInstance:
    """Extract features, build P_1..P_T and rasterize seeds once per item."""
    source, seeds, labels = item
    pyramid = extract_pyramid(source, cfg) if isinstance(source, Image) else source
    height, width = pyramid.shape
    grid = NodeGrid.for_image(height, width, cfg.downsample_factor)
    if labels.grid != grid:
        raise ShapeMismatchError(f"labels on grid {labels.grid.shape}, features give {grid.shape}")
    labels.require_classes(cfg.num_classes)

    projections = default_projections(pyramid.dims, cfg)
    transitions = tuple(build_transitions(pyramid, projections, grid, cfg))
    x = rasterize_seeds(seeds, grid, cfg.num_classes)
    return TrainingInstance(x=x, transitions=transitions, labels=labels)


def instance_loss(
    instance: TrainingInstance, params: CascadeParams, head: ImportanceHead, cfg: EngineConfig
) -> Tuple[float, np.ndarray]:
    """Loss and full gradient vector (packed like parameters.pack) for one item."""
    m = importance(instance.x, head, instance.grid)
    s = make_seed(instance.x, m)
    state = run_cascade(s, instance.transitions, params, cfg, keep_trace=True)
    loss, dl_dy = cross_entropy(state.current, instance.labels)
    grads = backward_cascade(
        state, instance.transitions, params, dl_dy, SeedInputs(instance.x, head, instance.grid)
    )
    vector = np.concatenate(
        [grads.mu_logits, grads.beta_logits, grads.head_weights, [grads.head_bias]]
    )
    return loss, vector


def dataset_loss(
    instances: Sequence[TrainingInstance],
    params: CascadeParams,
    head: ImportanceHead,
    cfg: EngineConfig,
    workers: int = 1,
) -> Tuple[float, np.ndarray]:
    """Mean loss and gradient, reduced in dataset order."""

    def evaluate(instance: TrainingInstance) -> Tuple[float, np.ndarray]:
        return instance_loss(instance, params, head, cfg)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(evaluate, instances))
    else:
        results = [evaluate(instance) for instance in instances]

    total_loss = 0.0
    total_grad = np.zeros_like(results[0][1])
    for loss, grad in results:
        total_loss += loss
        total_grad += grad
    return total_loss / len(results), total_grad / len(results)


def fit(
    dataset: Sequence[DatasetItem],
    cfg: EngineConfig,
    tcfg: TrainConfig,
    params: Optional[CascadeParams] = None,
    head: Optional[ImportanceHead] = None,
) -> FitResult:
    """
    Momentum gradient descent over the trainable parameter set.

    Args:
        dataset: (Image or FeaturePyramid, node seeds, node labels) items
        params/head: Starting point (default: all logits 0, zero head)

    Returns:
        FitResult with trained parameters and per-epoch loss history

    Raises:
        TrainingDivergedError if the loss becomes non-finite
    """
    if not dataset:
        raise ShapeMismatchError("training needs a non-empty dataset")

    instances = [prepare_instance(item, cfg) for item in dataset]
    params = params or CascadeParams.initial(cfg.num_stages)
    head = head or ImportanceHead.zeros(cfg.num_classes)
    if params.stages != cfg.num_stages or head.classes != cfg.num_classes:
        raise ShapeMismatchError("initial parameters do not match the configuration")

    theta = pack(params, head)
    mask = trainable_mask(cfg.num_stages, cfg.num_classes, tcfg.train_cascade, tcfg.train_head)
    velocity = np.zeros_like(theta)
    history = []

    logger.info(
        f"Training on {len(instances)} item(s) for {tcfg.epochs} epochs "
        f"(lr={tcfg.learning_rate}, momentum={tcfg.momentum})"
    )
    for epoch in range(tcfg.epochs):
        try:
            current_params, current_head = unpack(theta, cfg.num_stages, cfg.num_classes)
            loss, grad = dataset_loss(instances, current_params, current_head, cfg, tcfg.workers)
        except NonFiniteError as e:
            raise TrainingDivergedError(f"non-finite values at epoch {epoch}: {e}") from e
        if not (np.isfinite(loss) and np.all(np.isfinite(grad))):
            raise TrainingDivergedError(f"loss became non-finite at epoch {epoch}")
        history.append(loss)

        velocity = tcfg.momentum * velocity - tcfg.learning_rate * (grad * mask)
        theta = theta + velocity
        if epoch % 20 == 0 or epoch == tcfg.epochs - 1:
            logger.debug(f"epoch {epoch}: loss={loss:.6f}")

    final_params, final_head = unpack(theta, cfg.num_stages, cfg.num_classes)
    logger.info(f"Training finished: loss {history[0]:.6f} → {history[-1]:.6f}")
    return FitResult(params=final_params, head=final_head, history=history)
