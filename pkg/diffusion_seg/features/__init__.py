"""Hierarchical feature pyramid standing in for network taps at increasing depth"""

from .provider import (
    FeatureProvider,
    FileProvider,
    HandcraftedProvider,
    load_pyramid,
    save_pyramid,
)
from .pyramid import FeatureMap, FeaturePyramid, expected_dims, extract_pyramid

__all__ = [
    "FeatureMap",
    "FeaturePyramid",
    "FeatureProvider",
    "FileProvider",
    "HandcraftedProvider",
    "expected_dims",
    "extract_pyramid",
    "load_pyramid",
    "save_pyramid",
]
