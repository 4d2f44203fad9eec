"""Null distribution of t-statistics under a true mean return of zero.

Absolute t-stats of null predictors are treated as |Normal(0, 1)|. Two
evaluation modes exist: "exact" computes tails and bin masses from the
normal CDF; "paper" is identical except that the two quantities that
published tables conventionally round, the two-sided tail at 2.0 (5%)
and the half-sigma mass on [0, 0.5] (38.3%), are pinned to those round
values so that outputs line up with printed numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

ROUNDED_TAIL_AT_2 = 0.05
ROUNDED_HALF_SIGMA_MASS = 0.383


@dataclass(frozen=True)
class NullModel:
    kind: str = "exact"

    def __post_init__(self) -> None:
        if self.kind not in ("exact", "paper"):
            raise ValueError(f"unknown null model kind: {self.kind!r}")

    def tail(self, hurdle):
        """Pr(|t| > hurdle) under the null. Accepts a scalar or an array."""
        h = np.asarray(hurdle, dtype=float)
        if np.any(h < 0):
            raise ValueError("hurdle must be non-negative")
        out = 2.0 * ndtr(-h)
        if self.kind == "paper":
            out = np.where(h == 2.0, ROUNDED_TAIL_AT_2, out)
        if np.ndim(hurdle) == 0:
            return float(out)
        return out

    def bin_mass(self, lo: float, hi: float) -> float:
        """Pr(lo <= |t| <= hi) under the null, for 0 <= lo <= hi."""
        if not 0.0 <= lo <= hi:
            raise ValueError("bin must satisfy 0 <= lo <= hi")
        if self.kind == "paper" and lo == 0.0 and hi == 0.5:
            return ROUNDED_HALF_SIGMA_MASS
        return float(2.0 * (ndtr(hi) - ndtr(lo)))

    def signed_interval_mass(self, lo: float, hi: float) -> float:
        """Pr(lo <= t <= hi) for the signed t; the interval may be asymmetric
        around zero. Always evaluated from the exact normal CDF."""
        if not lo < hi:
            raise ValueError("interval must satisfy lo < hi")
        return float(ndtr(hi) - ndtr(lo))


EXACT_NORMAL = NullModel("exact")
PAPER = NullModel("paper")


def null_model(kind: str) -> NullModel:
    """Build a NullModel from its CLI/API name ("exact" or "paper")."""
    return NullModel(kind)
