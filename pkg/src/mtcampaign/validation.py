"""Input checks shared by the metric, significance and pipeline layers."""

from __future__ import annotations

import math
from typing import Sequence


class DataContractError(ValueError):
    """Input data violates a documented contract (line counts, columns, ...)."""


def check_aligned(hyps: Sequence, refs: Sequence, what: str = "hypotheses") -> None:
    if len(hyps) != len(refs):
        raise DataContractError(
            f"{what} and references differ in length: {len(hyps)} vs {len(refs)}"
        )


def check_positive_int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return value


def check_finite(value: float, name: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise DataContractError(f"{name} must be finite, got {value!r}")
    return value


def check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ValueError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    return seed
