"""Reverse-mode gradients of the cascade with P_t held constant"""

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from ..core.grid import NodeGrid
from ..core.types import ScoreMap
from ..diffusion.cascade import CascadeParams, CascadeState
from ..errors import MissingTraceError, ShapeMismatchError
from ..seed.importance import ImportanceHead, importance_backward
from ..similarity.transitions import TransitionMatrix


class SeedInputs(NamedTuple):
    """What s = H(x)·x was computed from, for chaining dL/ds into the head."""

    x: ScoreMap
    head: ImportanceHead
    grid: NodeGrid


@dataclass
class CascadeGradients:
    mu_logits: np.ndarray
    beta_logits: np.ndarray
    seed: np.ndarray
    head_weights: Optional[np.ndarray] = None
    head_bias: Optional[float] = None


def backward_cascade(
    state: CascadeState,
    transitions: Sequence[TransitionMatrix],
    params: CascadeParams,
    dl_dy: np.ndarray,
    seed_inputs: Optional[SeedInputs] = None,
) -> CascadeGradients:
    """
    Accumulate gradients through y^{t+1} = β_t(μ_t P_t y^t + (1 − μ_t)s) + (1 − β_t)y^t.

    Args:
        state: Cascade run with keep_trace=True (y^0 = s first)
        dl_dy: dL/dy^T
        seed_inputs: When given, dL/ds is chained through s = M·x into the head

    Returns:
        Gradients w.r.t. μ/β logits, s, and optionally the head parameters
    """
    if state.trace is None or len(state.trace) != len(state.executed) + 1:
        raise MissingTraceError("backward pass needs the full trace y^0..y^T")

    g = np.asarray(dl_dy, dtype=np.float64).copy()
    s = state.trace[0].values
    if g.shape != s.shape:
        raise ShapeMismatchError(f"dL/dy has shape {g.shape}, predictions {s.shape}")

    mu, beta = params.effective()
    d_mu = np.zeros(params.stages)
    d_beta = np.zeros(params.stages)
    d_s = np.zeros_like(s)

    for step in reversed(range(len(state.executed))):
        t = state.executed[step] - 1
        p = transitions[t].values
        y_prev = state.trace[step].values
        m, b = mu[t], beta[t]

        py = p @ y_prev
        walked = m * py + (1.0 - m) * s
        d_beta[t] = np.sum(g * (walked - y_prev)) * b * (1.0 - b)
        d_mu[t] = b * np.sum(g * (py - s)) * m * (1.0 - m)
        d_s += b * (1.0 - m) * g
        g = b * m * (p.T @ g) + (1.0 - b) * g

    # y^0 = s
    d_s += g

    grads = CascadeGradients(mu_logits=d_mu, beta_logits=d_beta, seed=d_s)
    if seed_inputs is not None:
        x = seed_inputs.x.values
        dl_dm = np.sum(d_s * x, axis=1)
        grads.head_weights, grads.head_bias = importance_backward(
            seed_inputs.x, seed_inputs.head, seed_inputs.grid, dl_dm
        )
    return grads
