"""Parser utilities for the engine's text formats"""

import math
import re
from typing import Optional, Tuple

from ..errors import ParameterFileError, SeedError

_NUMBER = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"

SEED_LINE = re.compile(
    rf"^\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*,\s*({_NUMBER})\s*$"
)
PARAMETER_LINE = re.compile(
    r"^\s*(mu_logit|beta_logit|head_w)\[(\d+)\]\s*=\s*(\S+)\s*$"
    r"|^\s*(head_b)\s*=\s*(\S+)\s*$"
)


def strip_comment(line: str) -> str:
    """Drop everything from the first '#' on."""
    sharp = line.find("#")
    return line if sharp < 0 else line[:sharp]


def parse_seed_line(line: str) -> Optional[Tuple[int, int, int, float]]:
    """
    Parse a seed line like '12,40,1,0.9'.

    Args:
        line: Raw text line; '#' starts a comment

    Returns:
        (row, col, class, confidence), or None for blank/comment lines
    """
    clean = strip_comment(line).strip()
    if not clean:
        return None

    match = SEED_LINE.match(clean)
    if not match:
        raise SeedError(f"Invalid seed line format: {line.strip()!r}")

    row, col, cls, conf = match.groups()
    confidence = float(conf)
    if not (math.isfinite(confidence) and confidence > 0):
        raise SeedError(f"seed confidence must be positive and finite: {line.strip()!r}")
    return int(row), int(col), int(cls), confidence


def parse_parameter_line(line: str) -> Optional[Tuple[str, Optional[int], float]]:
    """
    Parse a parameter line like 'mu_logit[2]=0.125' or 'head_b=-1.5'.

    Returns:
        (name, index or None, value), or None for blank/comment lines
    """
    clean = strip_comment(line).strip()
    if not clean:
        return None

    match = PARAMETER_LINE.match(clean)
    if not match:
        raise ParameterFileError(f"Invalid parameter line format: {line.strip()!r}")

    if match.group(4):
        name, index, raw = match.group(4), None, match.group(5)
    else:
        name, index, raw = match.group(1), int(match.group(2)), match.group(3)

    try:
        value = float(raw)
    except ValueError as e:
        raise ParameterFileError(f"non-numeric value in {line.strip()!r}") from e
    if not math.isfinite(value):
        raise ParameterFileError(f"non-finite value in {line.strip()!r}")
    return name, index, value
