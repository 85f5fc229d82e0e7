"""Seed branch: sparse seeds, importance map and influence map"""

from .importance import (
    ImportanceHead,
    ImportanceMap,
    InfluenceMap,
    importance,
    importance_backward,
    influence,
    make_seed,
    neighborhoods,
)
from .seeds import (
    PixelSeed,
    SeedEntry,
    SparseSeeds,
    block_vote,
    load_seeds,
    rasterize_seeds,
    read_scribble,
    read_seed_file,
    write_seed_file,
)

__all__ = [
    "ImportanceHead",
    "ImportanceMap",
    "InfluenceMap",
    "PixelSeed",
    "SeedEntry",
    "SparseSeeds",
    "block_vote",
    "importance",
    "importance_backward",
    "influence",
    "load_seeds",
    "make_seed",
    "neighborhoods",
    "rasterize_seeds",
    "read_scribble",
    "read_seed_file",
    "write_seed_file",
]
