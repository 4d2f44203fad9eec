"""Parametric factor model: point-mass-or-exponential expected returns with
equicorrelated normal t-stats and staircase publication.

Expected returns are zero with probability p0 and Exponential with mean
lambda_bps otherwise. Given its expected return, a factor's t-stat is
normal with unit variance, mean mu/SE, and pairwise correlation rho,
implemented with one common Gaussian factor (sqrt(rho) * Z +
sqrt(1 - rho) * e), which achieves the constant correlation exactly in
O(N) per draw. Signed t-stats are simulated; discovery logic uses |t|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .simkit import SelectionRule, replication_rng, selection_probabilities


def hlz_default_se(n_months: int = 240, annual_vol_bps: float = 1500.0) -> float:
    """Standard error of a mean monthly return in bps: (vol/sqrt(12))/sqrt(T)."""
    if n_months < 1:
        raise ValueError("n_months must be positive")
    return (annual_vol_bps / math.sqrt(12.0)) / math.sqrt(n_months)


@dataclass(frozen=True)
class HlzParams:
    p0: float = 0.444
    lambda_bps: float = 55.5
    se_bps: float = field(default_factory=hlz_default_se)
    rho: float = 0.2
    n_factors: int = 1378
    s_bar: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.p0 <= 1.0:
            raise ValueError("p0 must lie in [0, 1]")
        if self.lambda_bps <= 0 or self.se_bps <= 0:
            raise ValueError("lambda_bps and se_bps must be positive")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must lie in [0, 1)")
        if self.n_factors < 1:
            raise ValueError("n_factors must be at least 1")
        if not 0.0 < self.s_bar <= 1.0:
            raise ValueError("s_bar must lie in (0, 1]")


@dataclass(frozen=True, eq=False)
class FactorDraw:
    mu_bps: np.ndarray
    t: np.ndarray  # signed
    is_false: np.ndarray
    published: np.ndarray


def hlz_draw(params: HlzParams, rng: np.random.Generator) -> FactorDraw:
    """One cross-section of factors.

    Draw order is fixed: truth labels, exponential means for true factors,
    the common normal factor, idiosyncratic normals, publication uniforms.
    """
    n = params.n_factors
    is_false = rng.random(n) < params.p0
    mu = np.zeros(n)
    n_true = int(np.sum(~is_false))
    if n_true:
        mu[~is_false] = rng.exponential(params.lambda_bps, n_true)
    common = rng.standard_normal()
    idio = rng.standard_normal(n)
    t = mu / params.se_bps + math.sqrt(params.rho) * common + math.sqrt(1.0 - params.rho) * idio
    rule = SelectionRule(s_bar=params.s_bar)
    published = rng.random(n) < selection_probabilities(np.abs(t), rule)
    return FactorDraw(mu_bps=mu, t=t, is_false=is_false, published=published)


# Benchmark FDR levels quoted for the reconciliation hurdles.
RECONCILIATION_FDR = {2.0: 0.09, 2.27: 0.05, 2.95: 0.01}


@dataclass(frozen=True)
class HlzCurvePoint:
    hurdle: float
    n_sims: int
    mean_fdr: float
    mean_discoveries: float
    mean_false_discoveries: float
    reference_fdr: float | None = None


def hlz_fdr_curve(
    params: HlzParams,
    hurdles,
    n_sims: int,
    seed: int = 0,
    published_only: bool = False,
) -> list[HlzCurvePoint]:
    """Mean FDP and discovery counts per hurdle across replications.

    By default every simulated factor counts toward discoveries, which is
    what the reconciliation hurdles benchmark. published_only restricts
    discoveries to factors that clear the staircase.
    """
    hurdles = [float(h) for h in hurdles]
    if not hurdles:
        raise ValueError("need at least one hurdle")
    if n_sims < 1:
        raise ValueError("n_sims must be at least 1")
    fdp_sum = np.zeros(len(hurdles))
    disc_sum = np.zeros(len(hurdles))
    false_sum = np.zeros(len(hurdles))
    for rep in range(n_sims):
        draw = hlz_draw(params, replication_rng(seed, rep))
        abs_t = np.abs(draw.t)
        eligible = draw.published if published_only else np.ones_like(draw.is_false)
        for j, h in enumerate(hurdles):
            disc = eligible & (abs_t > h)
            r = int(disc.sum())
            f = int(np.sum(disc & draw.is_false))
            fdp_sum[j] += f / r if r > 0 else 0.0
            disc_sum[j] += r
            false_sum[j] += f
    return [
        HlzCurvePoint(
            hurdle=h,
            n_sims=n_sims,
            mean_fdr=float(fdp_sum[j] / n_sims),
            mean_discoveries=float(disc_sum[j] / n_sims),
            mean_false_discoveries=float(false_sum[j] / n_sims),
            reference_fdr=RECONCILIATION_FDR.get(h),
        )
        for j, h in enumerate(hurdles)
    ]


def hlz_share_above(
    params: HlzParams,
    lower: float,
    upper: float,
    n_sims: int,
    seed: int = 0,
) -> float:
    """Among published factors with |t| > lower, the share with |t| > upper,
    averaged across replications (replications with no such factor skipped)."""
    if not lower < upper:
        if lower == upper:
            return 1.0
        raise ValueError("need lower <= upper")
    shares = []
    for rep in range(n_sims):
        draw = hlz_draw(params, replication_rng(seed, rep))
        abs_t = np.abs(draw.t)
        base = draw.published & (abs_t > lower)
        n_base = int(base.sum())
        if n_base == 0:
            continue
        shares.append(float(np.sum(base & (abs_t > upper)) / n_base))
    if not shares:
        raise ValueError("no replication produced a factor above the lower hurdle")
    return float(np.mean(shares))


def implied_fdr_ceiling(share_beyond: float, fdr_beyond: float) -> float:
    """Worst case FDR at a loose hurdle from the share of discoveries that
    also clear a stricter hurdle with known FDR: assume everything below the
    strict hurdle is false."""
    if not 0.0 <= share_beyond <= 1.0 or not 0.0 <= fdr_beyond <= 1.0:
        raise ValueError("inputs must lie in [0, 1]")
    return share_beyond * fdr_beyond + (1.0 - share_beyond)
