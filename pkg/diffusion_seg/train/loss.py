"""Per-node softmax cross-entropy over K scores"""

from typing import Tuple

import numpy as np
from scipy.special import logsumexp, softmax

from ..core.types import LabelMap, ScoreMap
from ..errors import EmptyLossError, ShapeMismatchError


def cross_entropy(y: ScoreMap, labels: LabelMap) -> Tuple[float, np.ndarray]:
    """
    Mean negative log-likelihood of the true class over non-ignored nodes.

    Returns:
        (loss, dL/dy) where dL/dy is zero on ignored nodes
    """
    if y.grid != labels.grid:
        raise ShapeMismatchError(f"prediction grid {y.grid.shape} differs from label grid {labels.grid.shape}")
    labels.require_classes(y.classes)

    valid = labels.valid_mask()
    count = int(valid.sum())
    if count == 0:
        raise EmptyLossError("every node carries the ignore label")

    scores = y.values[valid]
    truth = labels.labels[valid]
    picked = scores[np.arange(count), truth]
    loss = float(np.mean(logsumexp(scores, axis=1) - picked))

    grad = np.zeros_like(y.values)
    probs = softmax(scores, axis=1)
    probs[np.arange(count), truth] -= 1.0
    grad[valid] = probs / count
    return loss, grad
