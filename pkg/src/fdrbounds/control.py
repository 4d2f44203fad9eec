"""FDR-controlling hurdle selection.

The step-up procedure is run in its hurdle-search form: candidate hurdles
are the observed |t| values; the selected hurdle is the smallest candidate
whose null tail is at most (rank / sample size) times the target bound.
That is algebraically the classic sorted-p-value step-up. The
dependence-robust variant divides the target by the harmonic number of the
sample size. Ties in |t| share a fate: every predictor at or above the
selected hurdle is discovered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptySampleError, NoDiscoveriesError
from .nulls import EXACT_NORMAL, NullModel
from .panel import TStatSample


@dataclass(frozen=True)
class ControlRequest:
    q_star: float
    method: str = "bh95"  # bh95 | by13
    null: NullModel = EXACT_NORMAL

    def __post_init__(self) -> None:
        if not 0.0 < self.q_star < 1.0:
            raise ValueError("q_star must lie in (0, 1)")
        if self.method not in ("bh95", "by13"):
            raise ValueError(f"unknown control method: {self.method!r}")


@dataclass(frozen=True)
class HurdleResult:
    hurdle: float | None  # None means no feasible hurdle exists
    discoveries: tuple[int, ...]
    fdr_bound_at_hurdle: float | None
    penalty: float
    n_tests: int

    @property
    def feasible(self) -> bool:
        return self.hurdle is not None


def harmonic_number(m: int) -> float:
    """Sum of 1/j for j = 1..m, accumulated in ascending j."""
    if m < 1:
        raise ValueError("m must be at least 1")
    return float(np.sum(1.0 / np.arange(1, m + 1)))


def _step_up(tstats: TStatSample, q_effective: float, penalty: float, null: NullModel) -> HurdleResult:
    m = len(tstats)
    if m == 0:
        raise EmptySampleError("cannot select a hurdle from an empty sample")
    order = np.argsort(-tstats.abs_t, kind="stable")
    t_sorted = tstats.abs_t[order]
    p_sorted = np.atleast_1d(null.tail(t_sorted))
    ranks = np.arange(1, m + 1)
    ok = p_sorted <= q_effective * ranks / m
    if not ok.any():
        return HurdleResult(None, (), None, penalty, m)
    k_star = int(np.flatnonzero(ok)[-1]) + 1
    h_star = float(t_sorted[k_star - 1])
    disc = np.flatnonzero(tstats.abs_t >= h_star)
    bound = penalty * null.tail(h_star) * m / disc.size
    return HurdleResult(h_star, tuple(int(i) for i in disc), float(bound), penalty, m)


def bh95_hurdle(tstats: TStatSample, request: ControlRequest) -> HurdleResult:
    """Smallest observed hurdle whose easy bound is at most q_star."""
    return _step_up(tstats, request.q_star, 1.0, request.null)


def by13_hurdle(tstats: TStatSample, request: ControlRequest) -> HurdleResult:
    """The step-up with the harmonic penalty, valid under arbitrary dependence."""
    penalty = harmonic_number(len(tstats)) if len(tstats) else 1.0
    return _step_up(tstats, request.q_star / penalty, penalty, request.null)


def fdr_bound_at_hurdle(
    tstats: TStatSample,
    hurdle: float,
    null: NullModel = EXACT_NORMAL,
    penalty: float = 1.0,
) -> float:
    """penalty * null tail / share strictly above the hurdle (uncapped).

    With penalty 1 this is exactly the easy bound at that hurdle.
    """
    n = len(tstats)
    if n == 0:
        raise EmptySampleError("cannot bound an empty t-stat sample")
    count = int(np.sum(tstats.abs_t > hurdle))
    if count == 0:
        raise NoDiscoveriesError(f"no |t| exceeds hurdle {hurdle}")
    return float(penalty * null.tail(hurdle) * n / count)


def bonferroni_hurdle(
    m_tests: int,
    level: float = 0.05,
    null: NullModel = EXACT_NORMAL,
) -> float:
    """The hurdle whose two-sided null tail equals level / m_tests.

    Solved by bisection on [0, 10]; the tail is strictly decreasing and
    10 sigma exceeds any practical hurdle.
    """
    if m_tests < 1:
        raise ValueError("m_tests must be at least 1")
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    target = level / m_tests
    lo, hi = 0.0, 10.0
    while hi - lo > 1e-9:
        mid = 0.5 * (lo + hi)
        if null.tail(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
