"""Random-walk steps and the cascade with adaptive identity mapping"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit, logit

from ..core.settings import EngineConfig
from ..core.types import ScoreMap
from ..errors import NonFiniteError, ShapeMismatchError
from ..similarity.transitions import TransitionMatrix
from ..utils.logger import get_logger

logger = get_logger("diffusion.cascade")


@dataclass(frozen=True)
class CascadeParams:
    """Per-stage μ_t and β_t stored as unconstrained logits."""

    mu_logits: np.ndarray
    beta_logits: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu_logits, dtype=np.float64).reshape(-1)
        beta = np.asarray(self.beta_logits, dtype=np.float64).reshape(-1)
        if mu.shape != beta.shape:
            raise ShapeMismatchError(f"{mu.shape[0]} μ logits vs {beta.shape[0]} β logits")
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(beta))):
            raise NonFiniteError("cascade logits must be finite")
        object.__setattr__(self, "mu_logits", mu)
        object.__setattr__(self, "beta_logits", beta)

    @property
    def stages(self) -> int:
        return self.mu_logits.shape[0]

    @property
    def mu(self) -> np.ndarray:
        return expit(self.mu_logits)

    @property
    def beta(self) -> np.ndarray:
        return expit(self.beta_logits)

    def effective(self) -> Tuple[np.ndarray, np.ndarray]:
        """Constrained (μ, β) values, the form reported in parameter tables."""
        return self.mu, self.beta

    @classmethod
    def initial(cls, stages: int) -> "CascadeParams":
        """All logits 0, i.e. μ_t = β_t = 0.5."""
        return cls(np.zeros(stages), np.zeros(stages))

    @classmethod
    def from_values(cls, mu: Sequence[float], beta: Sequence[float]) -> "CascadeParams":
        return cls(logit(np.asarray(mu, dtype=np.float64)), logit(np.asarray(beta, dtype=np.float64)))

    def select(self, stages: Sequence[int]) -> "CascadeParams":
        """Parameters of the given 1-based stages, in order."""
        index = [t - 1 for t in stages]
        return CascadeParams(self.mu_logits[index], self.beta_logits[index])


@dataclass
class CascadeState:
    """Prediction y^t after `stage` executed stages, with optional trace y^0..y^t."""

    current: ScoreMap
    stage: int = 0
    executed: List[int] = field(default_factory=list)
    trace: Optional[List[ScoreMap]] = None


def _check_operands(y: ScoreMap, p: TransitionMatrix, s: ScoreMap) -> None:
    y.require_compatible(s)
    if p.size != y.grid.count:
        raise ShapeMismatchError(f"{p.size}-node transition matrix for a {y.grid.count}-node score map")


def walk_step(y: ScoreMap, p: TransitionMatrix, s: ScoreMap, mu: float) -> ScoreMap:
    """R(y, P, s, μ) = μ·P·y + (1 − μ)·s."""
    _check_operands(y, p, s)
    return ScoreMap(y.grid, mu * (p.values @ y.values) + (1.0 - mu) * s.values)


def cascade_step(
    y: ScoreMap, p: TransitionMatrix, s: ScoreMap, mu: float, beta: float
) -> ScoreMap:
    """β·R(y, P, s, μ) + (1 − β)·y."""
    walked = walk_step(y, p, s, mu)
    return ScoreMap(y.grid, beta * walked.values + (1.0 - beta) * y.values)


def run_cascade(
    s: ScoreMap,
    transitions: Sequence[TransitionMatrix],
    params: CascadeParams,
    cfg: EngineConfig,
    keep_trace: bool = False,
) -> CascadeState:
    """
    Propagate the seed through the cascade starting from y^0 = s.

    Stages listed in cfg.skip_stages are omitted entirely.
    """
    if len(transitions) != cfg.num_stages or params.stages != cfg.num_stages:
        raise ShapeMismatchError(
            f"cascade of {cfg.num_stages} stages given {len(transitions)} matrices "
            f"and {params.stages} parameter pairs"
        )

    mu, beta = params.effective()
    state = CascadeState(current=s, trace=[s] if keep_trace else None)
    for t in cfg.active_stages():
        state.current = cascade_step(
            state.current, transitions[t - 1], s, float(mu[t - 1]), float(beta[t - 1])
        )
        state.stage += 1
        state.executed.append(t)
        if keep_trace:
            state.trace.append(state.current)

    logger.debug(f"Cascade ran stages {state.executed}")
    return state
