"""Synthetic two-region images with sparse, noisy seeds and groundtruth labels"""

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np

from ..config import DEFAULT_DOWNSAMPLE_FACTOR
from ..core.grid import NodeGrid
from ..core.types import Image
from ..io.atomic import PathLike
from ..io.netpbm import write_image, write_netpbm
from ..seed.seeds import PixelSeed, write_seed_file
from ..utils.logger import get_logger

logger = get_logger("examples.synthetic")

# Region colour pairs; every pair differs in all three channels
REGION_PALETTES: Dict[str, Tuple[Tuple[float, ...], Tuple[float, ...]]] = {
    "sea_sand": ((0.15, 0.35, 0.70), (0.85, 0.70, 0.35)),
    "forest_sky": ((0.15, 0.55, 0.20), (0.60, 0.80, 0.95)),
    "brick_slate": ((0.70, 0.25, 0.20), (0.30, 0.40, 0.55)),
    "night_lamp": ((0.10, 0.10, 0.25), (0.95, 0.85, 0.40)),
}

TEXTURE_NOISE = 0.04
STRIPE_AMPLITUDE = 0.08


@dataclass(frozen=True)
class SyntheticItem:
    name: str
    image: Image
    seeds: List[PixelSeed]
    labels: np.ndarray  # (h, w) uint8 groundtruth


def _render(rng: np.random.Generator, size: int, palette: str) -> Tuple[np.ndarray, np.ndarray]:
    """Left region class 0 with flat noise, right region class 1 with horizontal stripes."""
    boundary = int(rng.integers(int(0.4 * size), int(0.6 * size) + 1))
    labels = np.zeros((size, size), dtype=np.uint8)
    labels[:, boundary:] = 1

    left, right = (np.asarray(c) for c in REGION_PALETTES[palette])
    rows = np.arange(size)[:, None]
    stripes = STRIPE_AMPLITUDE * np.sign(np.sin(rows * np.pi / 3.0))
    data = np.where(labels[None, :, :] == 0, left[:, None, None], right[:, None, None] + stripes[None])
    data = data + rng.normal(scale=TEXTURE_NOISE, size=data.shape)
    return np.clip(data, 0.0, 1.0), labels


def _place_seeds(
    rng: np.random.Generator,
    labels: np.ndarray,
    grid: NodeGrid,
    density: float,
    noise: float,
) -> List[PixelSeed]:
    """
    One pixel seed in each of ceil(density·N) distinct node blocks.

    Each label is flipped with probability `noise`; draws are repeated until
    every region holds more correctly labeled seeds than flipped ones.
    """
    height, width = labels.shape
    rho = grid.downsample_factor
    count = max(2, math.ceil(density * grid.count))
    while True:
        nodes = rng.choice(grid.count, size=count, replace=False)
        seeds = []
        correct = np.zeros(2, dtype=int)
        flipped = np.zeros(2, dtype=int)
        for node in sorted(nodes.tolist()):
            r, c = divmod(node, grid.width)
            row = int(rng.integers(r * rho, min((r + 1) * rho, height)))
            col = int(rng.integers(c * rho, min((c + 1) * rho, width)))
            truth = int(labels[row, col])
            if rng.random() < noise:
                flipped[truth] += 1
                seeds.append(PixelSeed(row, col, 1 - truth, 1.0))
            else:
                correct[truth] += 1
                seeds.append(PixelSeed(row, col, truth, 1.0))
        if np.all(correct > flipped):
            return seeds


def generate_item(
    index: int,
    rng: np.random.Generator,
    size: int = 60,
    density: float = 0.05,
    noise: float = 0.10,
    downsample_factor: int = DEFAULT_DOWNSAMPLE_FACTOR,
) -> SyntheticItem:
    palette = list(REGION_PALETTES)[index % len(REGION_PALETTES)]
    data, labels = _render(rng, size, palette)
    grid = NodeGrid.for_image(size, size, downsample_factor)
    seeds = _place_seeds(rng, labels, grid, density, noise)
    return SyntheticItem(f"synth_{index:03d}", Image(data), seeds, labels)


def generate_suite(
    count: int = 20,
    seed: int = 0,
    size: int = 60,
    density: float = 0.05,
    noise: float = 0.10,
    downsample_factor: int = DEFAULT_DOWNSAMPLE_FACTOR,
) -> List[SyntheticItem]:
    """Deterministic suite of `count` two-region items."""
    rng = np.random.default_rng(seed)
    return [
        generate_item(i, rng, size, density, noise, downsample_factor) for i in range(count)
    ]


def write_suite(directory: PathLike, items: List[SyntheticItem]) -> List[Path]:
    """Write `<name>.ppm`, `<name>.seeds` and `<name>.gt.pgm` per item."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for item in items:
        written.append(write_image(directory / f"{item.name}.ppm", item.image))
        written.append(write_seed_file(directory / f"{item.name}.seeds", item.seeds))
        written.append(write_netpbm(directory / f"{item.name}.gt.pgm", item.labels))
    logger.info(f"Wrote {len(items)} synthetic item(s) to {directory}")
    return written
