"""Prediction readout, label resampling and mean intersection-over-union"""

from typing import List, Tuple

import numpy as np

from .config import IGNORE_LABEL
from .core.grid import NodeGrid
from .core.types import LabelMap, ScoreMap
from .errors import ShapeMismatchError


def argmax_labels(y: ScoreMap) -> LabelMap:
    """Per node the lowest class index attaining the maximum score."""
    return LabelMap(y.grid, np.argmax(y.values, axis=1))


def miou(pred: LabelMap, truth: LabelMap, classes: int) -> Tuple[List[float], float]:
    """
    Per-class IoU and their mean over nodes whose truth is not the ignore label.

    Classes with an empty union get NaN in the per-class list and are left out
    of the mean; the mean of no classes is 0.
    """
    if pred.grid != truth.grid:
        raise ShapeMismatchError(
            f"prediction grid {pred.grid.shape} differs from truth grid {truth.grid.shape}"
        )
    valid = truth.valid_mask() & (pred.labels != IGNORE_LABEL)
    p = pred.labels[valid]
    t = truth.labels[valid]

    per_class = []
    for k in range(classes):
        intersection = np.count_nonzero((p == k) & (t == k))
        union = np.count_nonzero((p == k) | (t == k))
        per_class.append(intersection / union if union else float("nan"))

    present = [v for v in per_class if not np.isnan(v)]
    return per_class, float(np.mean(present)) if present else 0.0


def downsample_labels(pixels: np.ndarray, grid: NodeGrid) -> LabelMap:
    """Majority label of each ρ×ρ block, ignoring IGNORE_LABEL pixels; ties go to the lowest class."""
    pixels = np.asarray(pixels, dtype=np.int64)
    rho = grid.downsample_factor
    expected = NodeGrid.for_image(pixels.shape[0], pixels.shape[1], rho)
    if expected != grid:
        raise ShapeMismatchError(f"{pixels.shape} label image does not cover grid {grid.shape}")

    labels = np.full(grid.count, IGNORE_LABEL, dtype=np.int64)
    for node in range(grid.count):
        r, c = divmod(node, grid.width)
        block = pixels[r * rho:(r + 1) * rho, c * rho:(c + 1) * rho].reshape(-1)
        block = block[block != IGNORE_LABEL]
        if block.size:
            labels[node] = int(np.argmax(np.bincount(block)))
    return LabelMap(grid, labels)


def upsample_labels(labels: LabelMap, image_height: int, image_width: int) -> np.ndarray:
    """Nearest-node upsampling of node labels to an image-resolution uint8 array."""
    rho = labels.grid.downsample_factor
    blocks = np.repeat(np.repeat(labels.grid.reshape(labels.labels), rho, axis=0), rho, axis=1)
    if blocks.shape[0] < image_height or blocks.shape[1] < image_width:
        raise ShapeMismatchError(
            f"grid {labels.grid.shape} at factor {rho} cannot cover {image_height}x{image_width}"
        )
    return blocks[:image_height, :image_width].astype(np.uint8)
