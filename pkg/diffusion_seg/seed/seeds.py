"""Sparse seeds: file formats, block voting onto the node grid, rasterization to a score map"""

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, NamedTuple, Tuple

import numpy as np

from ..config import UNSEEDED_PIXEL
from ..core.grid import NodeGrid
from ..core.types import ScoreMap
from ..errors import BoundsError, SeedError
from ..io.atomic import PathLike, atomic_write_text
from ..io.netpbm import read_pgm
from ..utils.logger import get_logger
from ..utils.parser import parse_seed_line

logger = get_logger("seed.seeds")


class SeedEntry(NamedTuple):
    node: int
    cls: int
    confidence: float


class PixelSeed(NamedTuple):
    row: int
    col: int
    cls: int
    confidence: float


@dataclass(frozen=True)
class SparseSeeds:
    """Node-resolution seeds; each (node, class) pair appears at most once."""

    entries: Tuple[SeedEntry, ...] = ()

    def __post_init__(self):
        entries = tuple(SeedEntry(*e) for e in self.entries)
        seen = set()
        for entry in entries:
            key = (entry.node, entry.cls)
            if key in seen:
                raise SeedError(f"duplicate seed for node {entry.node}, class {entry.cls}")
            seen.add(key)
            if not (np.isfinite(entry.confidence) and entry.confidence > 0):
                raise SeedError(f"seed confidence must be positive, got {entry.confidence}")
        object.__setattr__(self, "entries", entries)

    def __len__(self) -> int:
        return len(self.entries)


def rasterize_seeds(seeds: SparseSeeds, grid: NodeGrid, classes: int) -> ScoreMap:
    """x_{i,k} = confidence for seeded (i, k), 0 elsewhere."""
    values = np.zeros((grid.count, classes))
    for entry in seeds.entries:
        if not 0 <= entry.node < grid.count:
            raise BoundsError(f"seed node {entry.node} out of range for {grid.count}-node grid")
        if not 0 <= entry.cls < classes:
            raise SeedError(f"seed class {entry.cls} outside [0, {classes})")
        values[entry.node, entry.cls] = entry.confidence
    return ScoreMap(grid, values)


def block_vote(
    pixel_seeds: Iterable[PixelSeed], grid: NodeGrid, image_height: int, image_width: int
) -> SparseSeeds:
    """
    Map image-resolution seeds onto nodes by confidence-weighted majority per ρ×ρ block.

    Ties go to the lowest class; the node confidence is the mean confidence of
    the winning class's pixel seeds in the block.
    """
    rho = grid.downsample_factor
    totals: dict = {}
    for seed in pixel_seeds:
        if not (0 <= seed.row < image_height and 0 <= seed.col < image_width):
            raise BoundsError(
                f"seed pixel ({seed.row}, {seed.col}) outside {image_height}x{image_width} image"
            )
        if seed.cls < 0:
            raise SeedError(f"negative seed class {seed.cls}")
        node = (seed.row // rho) * grid.width + seed.col // rho
        per_class = totals.setdefault(node, {})
        weight, count = per_class.get(seed.cls, (0.0, 0))
        per_class[seed.cls] = (weight + seed.confidence, count + 1)

    entries = []
    for node in sorted(totals):
        per_class = totals[node]
        winner = min(per_class, key=lambda cls: (-per_class[cls][0], cls))
        weight, count = per_class[winner]
        entries.append(SeedEntry(node, winner, weight / count))
    return SparseSeeds(tuple(entries))


def read_seed_file(path: PathLike) -> List[PixelSeed]:
    """Text seeds: one `row,col,class,confidence` per line, '#' comments allowed."""
    seeds = []
    with open(path, "r") as f:
        for lineno, line in enumerate(f, start=1):
            try:
                parsed = parse_seed_line(line)
            except SeedError as e:
                raise SeedError(f"{path}:{lineno}: {e}") from e
            if parsed is not None:
                seeds.append(PixelSeed(*parsed))
    logger.debug(f"Read {len(seeds)} pixel seeds from {path}")
    return seeds


def format_seed_file(seeds: Iterable[PixelSeed]) -> str:
    lines = ["# row,col,class,confidence"]
    lines += [f"{s.row},{s.col},{s.cls},{s.confidence!r}" for s in seeds]
    return "\n".join(lines) + "\n"


def write_seed_file(path: PathLike, seeds: Iterable[PixelSeed]) -> Path:
    return atomic_write_text(path, format_seed_file(seeds))


def read_scribble(path: PathLike) -> List[PixelSeed]:
    """Scribble mask PGM: pixel value is the class id, 255 means unseeded."""
    mask = read_pgm(path)
    rows, cols = np.nonzero(mask != UNSEEDED_PIXEL)
    return [PixelSeed(int(r), int(c), int(mask[r, c]), 1.0) for r, c in zip(rows, cols)]


def load_seeds(path: PathLike) -> List[PixelSeed]:
    """Dispatch on suffix: .pgm is a scribble mask, anything else is a text seed file."""
    if Path(path).suffix.lower() == ".pgm":
        return read_scribble(path)
    return read_seed_file(path)
