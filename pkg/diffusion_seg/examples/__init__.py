"""Synthetic example library"""

from .synthetic import REGION_PALETTES, SyntheticItem, generate_item, generate_suite, write_suite

__all__ = ["REGION_PALETTES", "SyntheticItem", "generate_item", "generate_suite", "write_suite"]
