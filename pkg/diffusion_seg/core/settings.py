"""Engine configuration model and validation"""

from typing import Any, FrozenSet, Literal, Mapping, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .. import config
from ..errors import ConfigValidationError


class EngineConfig(BaseModel):
    """Frozen engine configuration; field constraints carry every invariant."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    num_stages: int = Field(default=config.DEFAULT_NUM_STAGES, ge=1)
    embed_dim: int = Field(default=config.DEFAULT_EMBED_DIM, ge=1)
    downsample_factor: int = Field(default=config.DEFAULT_DOWNSAMPLE_FACTOR, ge=1)
    affinity_scale: bool = True
    softmax_temperature: float = Field(default=config.DEFAULT_SOFTMAX_TEMPERATURE, gt=0)
    standardize_epsilon: float = Field(default=config.DEFAULT_STANDARDIZE_EPSILON, gt=0)
    skip_stages: FrozenSet[int] = frozenset()
    num_classes: int = Field(default=config.DEFAULT_NUM_CLASSES, ge=1)
    pool_mode: Literal["average", "max"] = config.DEFAULT_POOL_MODE
    kmeans_clusters: int = Field(default=config.KMEANS_CLUSTERS, ge=1)
    kmeans_iterations: int = Field(default=config.KMEANS_ITERATIONS, ge=1)
    position_weight: float = Field(default=config.KMEANS_POSITION_WEIGHT, ge=0)

    @model_validator(mode="after")
    def _skip_stages_in_range(self) -> "EngineConfig":
        outside = sorted(t for t in self.skip_stages if not 1 <= t <= self.num_stages)
        if outside:
            raise ValueError(
                f"skip_stages {outside} outside 1..{self.num_stages}"
            )
        return self

    def active_stages(self) -> list:
        """1-based stage numbers that run, in order."""
        return [t for t in range(1, self.num_stages + 1) if t not in self.skip_stages]


def _describe(error: dict) -> str:
    field = ".".join(str(part) for part in error.get("loc", ())) or "skip_stages"
    return f"{field}: {error['msg']}"


def validate_config(cfg: Union[EngineConfig, Mapping[str, Any], None] = None) -> EngineConfig:
    """
    Validate an engine configuration.

    Args:
        cfg: An EngineConfig, a mapping of overrides, or None for defaults

    Returns:
        The validated EngineConfig

    Raises:
        ConfigValidationError naming every violated field
    """
    data = cfg.model_dump() if isinstance(cfg, BaseModel) else dict(cfg or {})
    try:
        return EngineConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigValidationError([_describe(err) for err in e.errors()]) from e
