"""Run manifest: a plain key=value record of one pipeline run"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from ..errors import DiffusionSegError
from .atomic import PathLike, atomic_write_text

PHASES = ("features", "similarity", "seed", "diffusion")


@dataclass
class RunManifest:
    """Config snapshot, inputs, effective μ_t/β_t, phase timings and outputs."""

    config: Dict[str, object] = field(default_factory=dict)
    inputs: Dict[str, str] = field(default_factory=dict)
    params_path: Optional[str] = None
    mu: List[float] = field(default_factory=list)
    beta: List[float] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)
    outputs: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for phase, seconds in self.timings.items():
            if seconds < 0:
                raise DiffusionSegError(f"negative timing {seconds} for phase {phase}")
        for value in list(self.mu) + list(self.beta):
            if not 0.0 <= value <= 1.0:
                raise DiffusionSegError(f"stage parameter {value} outside [0, 1]")

    def lines(self) -> List[str]:
        out = [f"config.{k}={_format_value(v)}" for k, v in sorted(self.config.items())]
        out += [f"input.{k}={v}" for k, v in sorted(self.inputs.items())]
        out.append(f"params={self.params_path if self.params_path else 'default'}")
        for t, (m, b) in enumerate(zip(self.mu, self.beta), start=1):
            out.append(f"stage.{t}.mu={m!r}")
            out.append(f"stage.{t}.beta={b!r}")
        out += [f"timing.{phase}={self.timings[phase]:.6f}" for phase in PHASES if phase in self.timings]
        out += [f"output.{k}={v}" for k, v in sorted(self.outputs.items())]
        return out

    def to_text(self) -> str:
        return "\n".join(self.lines()) + "\n"

    def write(self, path: PathLike) -> Path:
        return atomic_write_text(path, self.to_text())


def _format_value(value: object) -> str:
    if isinstance(value, (set, frozenset, list, tuple)):
        return ",".join(str(v) for v in sorted(value))
    return str(value)


def read_manifest(path: PathLike) -> Dict[str, str]:
    """Manifest lines as a flat key → raw value mapping."""
    entries = {}
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise DiffusionSegError(f"{path}: manifest line without '=': {line!r}")
        entries[key] = value
    return entries
