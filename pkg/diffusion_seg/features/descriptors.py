"""Hand-crafted descriptors of increasing receptive field, one per pyramid level.

Every function takes channel-major image data (c, h, w) and returns (d, h, w).
Windows replicate edge pixels so descriptor dimensionality is constant at borders.
"""

import hashlib

import numpy as np
from scipy import ndimage
from scipy.cluster.vq import kmeans2
from scipy.spatial.distance import cdist
from scipy.special import softmax

from ..config import DESCRIPTOR_WINDOWS, GRADIENT_ORIENTATION_BINS


def _box_mean(channel: np.ndarray, size: int) -> np.ndarray:
    return ndimage.uniform_filter(channel, size=size, mode="nearest")


def normalized_coordinates(height: int, width: int) -> np.ndarray:
    rows = np.broadcast_to((np.arange(height) / height)[:, None], (height, width))
    cols = np.broadcast_to((np.arange(width) / width)[None, :], (height, width))
    return np.stack([rows, cols])


def color_position(data: np.ndarray) -> np.ndarray:
    """Level 1: raw channels plus (row/h, col/w); d = c + 2."""
    _, height, width = data.shape
    return np.concatenate([data, normalized_coordinates(height, width)])


def local_statistics(data: np.ndarray) -> np.ndarray:
    """Level 2: 3×3 mean and standard deviation per channel; d = 2c."""
    size = DESCRIPTOR_WINDOWS["local"]
    means = np.stack([_box_mean(ch, size) for ch in data])
    squares = np.stack([_box_mean(ch * ch, size) for ch in data])
    stds = np.sqrt(np.maximum(squares - means * means, 0.0))
    return np.concatenate([means, stds])


def gradient_histogram(data: np.ndarray) -> np.ndarray:
    """Level 3: gradient magnitude plus a magnitude-weighted orientation histogram; d = 5."""
    gray = data.mean(axis=0)
    gy = ndimage.sobel(gray, axis=0, mode="nearest") / 8.0
    gx = ndimage.sobel(gray, axis=1, mode="nearest") / 8.0
    magnitude = np.hypot(gx, gy)

    # unsigned orientation in [0, π)
    theta = np.mod(np.arctan2(gy, gx), np.pi)
    bins = np.minimum(
        (theta / (np.pi / GRADIENT_ORIENTATION_BINS)).astype(int), GRADIENT_ORIENTATION_BINS - 1
    )
    size = DESCRIPTOR_WINDOWS["gradient"]
    histogram = [
        _box_mean(np.where(bins == b, magnitude, 0.0), size)
        for b in range(GRADIENT_ORIENTATION_BINS)
    ]
    return np.stack([magnitude] + histogram)


def context_average(data: np.ndarray) -> np.ndarray:
    """Level 4: 15×15 box average per channel; d = c."""
    size = DESCRIPTOR_WINDOWS["context"]
    return np.stack([_box_mean(ch, size) for ch in data])


def content_seed(data: np.ndarray) -> int:
    """Deterministic RNG seed derived from the image checksum."""
    digest = hashlib.sha256(np.ascontiguousarray(data).tobytes()).digest()
    return int.from_bytes(digest[:8], "little")


def cluster_assignments(
    data: np.ndarray, clusters: int, iterations: int, position_weight: float
) -> np.ndarray:
    """Level 5: soft assignments to colour-position centroids fitted on this image; d = k."""
    channels, height, width = data.shape
    coords = position_weight * normalized_coordinates(height, width)
    points = np.concatenate([data, coords]).reshape(channels + 2, -1).T

    rng = np.random.default_rng(content_seed(data))
    centroids, _ = kmeans2(points, clusters, iter=iterations, minit="++", rng=rng)

    sq_dist = cdist(points, centroids, "sqeuclidean")
    scale = sq_dist.min(axis=1).mean() + 1e-12
    soft = softmax(-sq_dist / scale, axis=1)
    return soft.T.reshape(clusters, height, width)
