"""Utility functions for the diffusion segmentation engine"""

from .parser import parse_parameter_line, parse_seed_line

__all__ = ["parse_parameter_line", "parse_seed_line"]
