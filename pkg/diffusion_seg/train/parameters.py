"""Trainable parameter vector and the plain-text parameter file.

File lines: `mu_logit[t]=v`, `beta_logit[t]=v`, `head_w[i]=v`, `head_b=v`,
with 0-based indices and values written by repr() so they round-trip exactly.
"""

from pathlib import Path
from typing import List, Tuple

import numpy as np

from ..diffusion.cascade import CascadeParams
from ..errors import ParameterFileError, ShapeMismatchError
from ..io.atomic import PathLike, atomic_write_text
from ..seed.importance import ImportanceHead
from ..utils.parser import parse_parameter_line


def pack(params: CascadeParams, head: ImportanceHead) -> np.ndarray:
    """θ = [μ logits, β logits, head weights, head bias]."""
    return np.concatenate([params.mu_logits, params.beta_logits, head.weights, [head.bias]])


def unpack(theta: np.ndarray, stages: int, classes: int) -> Tuple[CascadeParams, ImportanceHead]:
    expected = 2 * stages + 9 * classes + 1
    if theta.shape[0] != expected:
        raise ShapeMismatchError(f"parameter vector of length {theta.shape[0]}, expected {expected}")
    params = CascadeParams(theta[:stages].copy(), theta[stages:2 * stages].copy())
    head = ImportanceHead(theta[2 * stages:-1].copy(), float(theta[-1]))
    return params, head


def parameter_names(stages: int, classes: int) -> List[str]:
    return (
        [f"mu_logit[{t}]" for t in range(stages)]
        + [f"beta_logit[{t}]" for t in range(stages)]
        + [f"head_w[{i}]" for i in range(9 * classes)]
        + ["head_b"]
    )


def trainable_mask(stages: int, classes: int, cascade: bool, head: bool) -> np.ndarray:
    return np.concatenate([
        np.full(2 * stages, float(cascade)),
        np.full(9 * classes + 1, float(head)),
    ])


def format_params(params: CascadeParams, head: ImportanceHead) -> str:
    lines = [f"mu_logit[{t}]={v!r}" for t, v in enumerate(params.mu_logits.tolist())]
    lines += [f"beta_logit[{t}]={v!r}" for t, v in enumerate(params.beta_logits.tolist())]
    lines += [f"head_w[{i}]={v!r}" for i, v in enumerate(head.weights.tolist())]
    lines.append(f"head_b={head.bias!r}")
    return "\n".join(lines) + "\n"


def save_params(path: PathLike, params: CascadeParams, head: ImportanceHead) -> Path:
    return atomic_write_text(path, format_params(params, head))


def _dense(values: dict, name: str) -> np.ndarray:
    if not values:
        raise ParameterFileError(f"no {name} entries")
    if sorted(values) != list(range(len(values))):
        raise ParameterFileError(f"{name} indices are not contiguous from 0")
    return np.array([values[i] for i in range(len(values))])


def parse_params(text: str) -> Tuple[CascadeParams, ImportanceHead]:
    found = {"mu_logit": {}, "beta_logit": {}, "head_w": {}}
    bias = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        parsed = parse_parameter_line(line)
        if parsed is None:
            continue
        name, index, value = parsed
        if name == "head_b":
            bias = value
            continue
        if index in found[name]:
            raise ParameterFileError(f"line {lineno}: duplicate {name}[{index}]")
        found[name][index] = value

    mu = _dense(found["mu_logit"], "mu_logit")
    beta = _dense(found["beta_logit"], "beta_logit")
    weights = _dense(found["head_w"], "head_w")
    if mu.shape != beta.shape:
        raise ParameterFileError(f"{mu.shape[0]} mu_logit vs {beta.shape[0]} beta_logit entries")
    if weights.shape[0] % 9:
        raise ParameterFileError(f"head_w has {weights.shape[0]} entries, not a multiple of 9")
    if bias is None:
        raise ParameterFileError("missing head_b")
    return CascadeParams(mu, beta), ImportanceHead(weights, bias)


def load_params(path: PathLike) -> Tuple[CascadeParams, ImportanceHead]:
    return parse_params(Path(path).read_text())
