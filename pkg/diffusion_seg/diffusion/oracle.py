"""Closed-form diffusion, the unrolled power series, fixed-point residual and energy"""

import numpy as np
import scipy.linalg

from ..core.types import ScoreMap
from ..errors import DegenerateGraphError, ShapeMismatchError, SingularSystemError
from ..seed.importance import ImportanceMap
from ..similarity.transitions import AffinityMatrix, TransitionMatrix


def _require_nodes(p: TransitionMatrix, s: ScoreMap) -> None:
    if p.size != s.grid.count:
        raise ShapeMismatchError(f"{p.size}-node matrix for a {s.grid.count}-node score map")


def closed_form(p: TransitionMatrix, s: ScoreMap, mu: float) -> ScoreMap:
    """
    Fixed point of the walk: solve (I − μP)·y = (1 − μ)·s.

    Uses an LU factorization with partial pivoting; no inverse is formed.
    """
    _require_nodes(p, s)
    system = np.eye(p.size) - mu * p.values
    try:
        y = scipy.linalg.solve(system, (1.0 - mu) * s.values, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise SingularSystemError(f"closed-form system not solvable at μ={mu}: {e}") from e
    if not np.all(np.isfinite(y)):
        raise SingularSystemError(f"closed-form solution non-finite at μ={mu}")
    return ScoreMap(s.grid, y)


def power_series(p: TransitionMatrix, s: ScoreMap, mu: float, terms: int) -> ScoreMap:
    """(μP)^{t+1}·s + (1 − μ)·Σ_{i=0}^{t} (μP)^i·s with t = terms."""
    _require_nodes(p, s)
    if terms < 0:
        raise ShapeMismatchError(f"terms must be >= 0, got {terms}")

    power_term = s.values.copy()
    partial_sum = np.zeros_like(power_term)
    for _ in range(terms + 1):
        partial_sum += power_term
        power_term = mu * (p.values @ power_term)
    return ScoreMap(s.grid, power_term + (1.0 - mu) * partial_sum)


def fixed_point_residual(y: ScoreMap, p: TransitionMatrix, s: ScoreMap, mu: float) -> float:
    """Max-norm of y − (μPy + (1 − μ)s)."""
    _require_nodes(p, s)
    y.require_compatible(s)
    update = mu * (p.values @ y.values) + (1.0 - mu) * s.values
    return float(np.max(np.abs(y.values - update)))


def energy(
    y: ScoreMap,
    w: AffinityMatrix,
    m: ImportanceMap,
    x: ScoreMap,
    mu: float,
    squared: bool = False,
) -> float:
    """
    Diffusion objective ½(μ Σ_ij W_ij ‖y_i/√d_ii − y_j/√d_jj‖ + (1 − μ) Σ_i M_ii ‖y_i − x_i‖).

    Args:
        squared: Use squared norms instead of the plain Euclidean norm

    Raises:
        DegenerateGraphError if any degree is not strictly positive
    """
    y.require_compatible(x)
    if w.size != y.grid.count or m.values.shape[0] != y.grid.count:
        raise ShapeMismatchError("energy operands disagree on node count")
    degrees = np.asarray(w.degrees, dtype=np.float64)
    if np.any(degrees <= 0):
        raise DegenerateGraphError(
            f"{int(np.sum(degrees <= 0))} node(s) with non-positive degree"
        )

    scaled = y.values / np.sqrt(degrees)[:, None]
    pairwise = scaled[:, None, :] - scaled[None, :, :]
    pair_norms = np.sum(pairwise ** 2, axis=2)
    data_norms = np.sum((y.values - x.values) ** 2, axis=1)
    if not squared:
        pair_norms = np.sqrt(pair_norms)
        data_norms = np.sqrt(data_norms)

    smooth = float(np.sum(w.values * pair_norms))
    fidelity = float(np.sum(m.values * data_norms))
    return 0.5 * (mu * smooth + (1.0 - mu) * fidelity)
