"""Diffusion solvers with a uniform result-dict interface"""

from typing import Dict, Sequence

import numpy as np

from ..core.settings import EngineConfig
from ..core.types import ScoreMap
from ..errors import DiffusionSegError
from ..similarity.transitions import TransitionMatrix
from ..utils.logger import get_logger
from .cascade import CascadeParams, run_cascade
from .oracle import closed_form, fixed_point_residual

logger = get_logger("diffusion.solvers")


def mean_transition(transitions: Sequence[TransitionMatrix]) -> TransitionMatrix:
    """Average of stage matrices; a convex combination stays row-stochastic."""
    stacked = np.mean([p.values for p in transitions], axis=0)
    return TransitionMatrix(values=stacked, level=0)


class CascadeSolver:
    """Cascaded random walks on per-stage transition matrices"""

    def __init__(self, cfg: EngineConfig, params: CascadeParams):
        self.cfg = cfg
        self.params = params
        self.solver_log = ""

    def solve(
        self, s: ScoreMap, transitions: Sequence[TransitionMatrix], keep_trace: bool = False
    ) -> Dict:
        """
        Run the cascade on a seed.

        Returns:
            Dictionary with prediction, state and a textual log
        """
        try:
            state = run_cascade(s, transitions, self.params, self.cfg, keep_trace=keep_trace)
            mu, beta = self.params.effective()
            lines = [f"Cascade stages executed: {state.executed}"]
            for t in state.executed:
                lines.append(f"  stage {t}: mu={mu[t - 1]:.4f} beta={beta[t - 1]:.4f}")
            self.solver_log = "\n".join(lines)
            return {
                "success": True,
                "status": "complete",
                "prediction": state.current,
                "state": state,
                "solver_log": self.solver_log,
            }
        except DiffusionSegError as e:
            logger.warning(f"Cascade failed: {e}")
            return {"success": False, "status": "failed", "error": str(e), "solver_log": self.solver_log}


class ClosedFormSolver:
    """Direct solve of the diffusion fixed point on a single transition matrix"""

    def __init__(self, mu: float):
        self.mu = mu
        self.solver_log = ""

    def solve(self, s: ScoreMap, transition: TransitionMatrix) -> Dict:
        try:
            y = closed_form(transition, s, self.mu)
            residual = fixed_point_residual(y, transition, s, self.mu)
            self.solver_log = (
                f"Closed-form solve: N={transition.size} mu={self.mu:.4f}\n"
                f"Fixed-point residual: {residual:.3e}"
            )
            return {
                "success": True,
                "status": "optimal",
                "prediction": y,
                "residual": residual,
                "solver_log": self.solver_log,
            }
        except DiffusionSegError as e:
            logger.warning(f"Closed-form solve failed: {e}")
            return {"success": False, "status": "singular", "error": str(e), "solver_log": self.solver_log}
