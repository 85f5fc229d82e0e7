"""Shared domain types, grid indexing and configuration"""

from .grid import NodeGrid, ceil_div, node_coords, node_index
from .settings import EngineConfig, validate_config
from .types import Image, LabelMap, ScoreMap

__all__ = [
    "EngineConfig",
    "Image",
    "LabelMap",
    "NodeGrid",
    "ScoreMap",
    "ceil_div",
    "node_coords",
    "node_index",
    "validate_config",
]
