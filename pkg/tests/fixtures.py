"""Shared builders for test instances"""

import numpy as np

from diffusion_seg.core.grid import NodeGrid
from diffusion_seg.core.types import Image, ScoreMap
from diffusion_seg.similarity.transitions import TransitionMatrix


def random_transition(rng: np.random.Generator, n: int, level: int = 1) -> TransitionMatrix:
    raw = rng.random((n, n)) + 1e-3
    return TransitionMatrix(raw / raw.sum(axis=1, keepdims=True), level=level)


def random_scores(rng: np.random.Generator, grid: NodeGrid, classes: int) -> ScoreMap:
    return ScoreMap(grid, rng.normal(size=(grid.count, classes)))


def uniform_transition(n: int, level: int = 1) -> TransitionMatrix:
    return TransitionMatrix(np.full((n, n), 1.0 / n), level=level)


def two_tone_image(height: int = 30, width: int = 30, split: int = 15) -> Image:
    """Dark left half, bright right half, three channels."""
    data = np.empty((3, height, width))
    data[:, :, :split] = np.array([0.1, 0.2, 0.3])[:, None, None]
    data[:, :, split:] = np.array([0.9, 0.7, 0.6])[:, None, None]
    return Image(data)


def textured_image(seed: int = 0, height: int = 30, width: int = 30) -> Image:
    rng = np.random.default_rng(seed)
    return Image(rng.random((3, height, width)))
