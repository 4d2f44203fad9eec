"""Ground-truth-labeled return simulations and bound validation.

A replication draws truth labels, builds a residual panel (cluster
bootstrap of a source panel, bootstrap mixed with fresh noise, or a fully
synthetic block-correlated Gaussian panel), adds the expected return of
true predictors, computes t-stats, optionally applies a staircase
publication rule, and measures the realized false discovery proportion
next to each bound.

Randomness is replication-indexed: stream r of a run with master seed s is
seeded from (s, r), so serial and threaded executions agree bit for bit.
Aggregation folds per-replication results in replication order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .bounds import DEFAULT_STOREY_BIN, StoreyBinSpec
from .errors import DataError, DimensionMismatchError
from .nulls import EXACT_NORMAL, NullModel
from .panel import ReturnPanel, TStatSample, masked_tstats

PCT_PER_BPS = 0.01


@dataclass(frozen=True)
class SyntheticSource:
    """Fresh Gaussian residuals with equicorrelated blocks, sd in percent/month."""

    block_size: int = 20
    within_block_corr: float = 0.35
    idio_sd: float = 3.32
    kind: str = field(default="synthetic", init=False)

    def __post_init__(self) -> None:
        if self.block_size < 1:
            raise ValueError("block_size must be at least 1")
        if not 0.0 <= self.within_block_corr < 1.0:
            raise ValueError("within_block_corr must lie in [0, 1)")
        if self.idio_sd <= 0:
            raise ValueError("idio_sd must be positive")


@dataclass
class ClusterBootstrapSource:
    """Resample whole months of a de-meaned source panel, drawn together."""

    source: ReturnPanel
    kind: str = field(default="cluster_bootstrap", init=False)


@dataclass
class MixedBootstrapSource:
    """Cluster bootstrap blended with i.i.d. Gaussian noise (sd percent/month)."""

    source: ReturnPanel
    boot_weight: float = 0.65
    noise_sd: float = 3.32
    kind: str = field(default="mixed_bootstrap", init=False)

    def __post_init__(self) -> None:
        if not 0.0 <= self.boot_weight <= 1.0:
            raise ValueError("boot_weight must lie in [0, 1]")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be non-negative")


@dataclass(frozen=True)
class SimConfig:
    n_predictors: int
    n_months: int
    gamma_bps: float
    p_false: float
    residual_source: object
    seed: int = 0
    n_sims: int = 1

    def __post_init__(self) -> None:
        if self.n_predictors < 1 or self.n_months < 1:
            raise ValueError("panel dimensions must be positive")
        if not 0.0 <= self.p_false <= 1.0:
            raise ValueError("p_false must lie in [0, 1]")
        if self.n_sims < 1:
            raise ValueError("n_sims must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")


@dataclass(frozen=True, eq=False)
class TruthLabels:
    is_false: np.ndarray

    def __len__(self) -> int:
        return int(self.is_false.size)


@dataclass(frozen=True)
class SelectionRule:
    """Staircase publication probabilities over |t| segments.

    thresholds split |t| into len(thresholds)+1 segments; a value exactly at
    a threshold belongs to the lower segment. The default is the familiar
    staircase: nothing below 1.96, half of s_bar on (1.96, 2.57], s_bar above.
    """

    thresholds: tuple[float, ...] = (1.96, 2.57)
    probabilities: tuple[float, ...] = ()
    s_bar: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.s_bar <= 1.0:
            raise ValueError("s_bar must lie in (0, 1]")
        if not self.probabilities:
            if len(self.thresholds) != 2:
                raise ValueError("default probabilities need exactly two thresholds")
            object.__setattr__(
                self, "probabilities", (0.0, 0.5 * self.s_bar, self.s_bar)
            )
        if len(self.probabilities) != len(self.thresholds) + 1:
            raise ValueError("need one probability per |t| segment")
        if any(not 0.0 <= p <= 1.0 for p in self.probabilities):
            raise ValueError("selection probabilities must lie in [0, 1]")
        if any(a > b for a, b in zip(self.probabilities, self.probabilities[1:])):
            raise ValueError("selection probabilities must be non-decreasing")
        if any(a >= b for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise ValueError("thresholds must be strictly increasing")


STAIRCASE = SelectionRule()


@dataclass(frozen=True)
class FdpResult:
    n_discoveries: int
    n_false_discoveries: int
    fdp: float


def replication_rng(seed: int, replication: int) -> np.random.Generator:
    """Independent stream for one replication of a seeded run."""
    return np.random.default_rng(np.random.SeedSequence((seed, replication)))


def make_truth_and_mu(config: SimConfig, rng: np.random.Generator):
    """Bernoulli(p_false) labels and the matching expected returns in percent."""
    is_false = rng.random(config.n_predictors) < config.p_false
    mu = np.where(is_false, 0.0, config.gamma_bps * PCT_PER_BPS)
    return TruthLabels(is_false), mu


@dataclass
class DemeanedSource:
    """A source panel de-meaned per predictor, ready for bootstrapping."""

    values: np.ndarray
    observed: np.ndarray
    predictor_ids: list[str]
    excluded_ids: list[str]


def demean_source(source: ReturnPanel) -> DemeanedSource:
    """Subtract each predictor's mean over its observed months.

    Predictors with zero observed months cannot be de-meaned and are
    excluded here, listed in the diagnostic.
    """
    obs = source.observed
    n_obs = obs.sum(axis=1)
    keep = n_obs > 0
    excluded = [pid for pid, k in zip(source.predictor_ids, keep) if not k]
    values = source.returns[keep]
    observed = obs[keep]
    if values.shape[0] == 0:
        raise DataError("source panel has no predictor with observed months")
    mean = np.where(observed, values, 0.0).sum(axis=1) / observed.sum(axis=1)
    demeaned = np.where(observed, values - mean[:, None], 0.0)
    ids = [pid for pid, k in zip(source.predictor_ids, keep) if k]
    return DemeanedSource(demeaned, observed, ids, excluded)


def _month_labels(n_months: int) -> list[str]:
    return [f"m{t:06d}" for t in range(n_months)]


def _as_panel(values, observed, ids, n_months) -> ReturnPanel:
    return ReturnPanel(ids, values, observed, _month_labels(n_months))


def _cluster_arrays(prep: DemeanedSource, n_predictors, n_months, rng):
    if n_predictors > prep.values.shape[0]:
        raise DataError(
            "n_predictors exceeds the usable source cross-section "
            f"({prep.values.shape[0]} predictors)"
        )
    month_idx = rng.integers(0, prep.values.shape[1], size=n_months)
    values = prep.values[:n_predictors][:, month_idx]
    observed = prep.observed[:n_predictors][:, month_idx]
    return values, observed


def cluster_bootstrap_residuals(
    source: ReturnPanel | DemeanedSource,
    n_predictors: int,
    n_months: int,
    rng: np.random.Generator,
) -> ReturnPanel:
    """Residual panel that redraws source months with replacement.

    All predictors share the same month draws, so the source cross-sectional
    correlation is preserved. Cells unobserved in the source stay unobserved.
    """
    prep = source if isinstance(source, DemeanedSource) else demean_source(source)
    values, observed = _cluster_arrays(prep, n_predictors, n_months, rng)
    return _as_panel(values, observed, prep.predictor_ids[:n_predictors], n_months)


def _mixed_arrays(prep: DemeanedSource, n_predictors, n_months, boot_weight, noise_sd, rng):
    # draw order: predictor identities, month indices, then the noise panel
    n_src, t_src = prep.values.shape
    pred_idx = rng.integers(0, n_src, size=n_predictors)
    month_idx = rng.integers(0, t_src, size=n_months)
    noise = rng.standard_normal((n_predictors, n_months)) * noise_sd
    if boot_weight > 0.0:
        boot = prep.values[pred_idx][:, month_idx]
        observed = prep.observed[pred_idx][:, month_idx]
        values = boot_weight * boot + (1.0 - boot_weight) * noise
        values = np.where(observed, values, 0.0)
    else:
        values = noise
        observed = np.ones_like(noise, dtype=bool)
    return values, observed


def mixed_bootstrap_residuals(
    source: ReturnPanel | DemeanedSource,
    n_predictors: int,
    n_months: int,
    boot_weight: float = 0.65,
    noise_sd: float = 3.32,
    *,
    rng: np.random.Generator,
) -> ReturnPanel:
    """Cluster bootstrap blended with fresh noise.

    Predictor identities are drawn with replacement (so the output may have
    more predictors than the source), month draws are shared across
    predictors, and the bootstrap component is weighted by boot_weight
    against (1 - boot_weight) times Gaussian noise with sd noise_sd.
    """
    if not 0.0 <= boot_weight <= 1.0:
        raise ValueError("boot_weight must lie in [0, 1]")
    if noise_sd < 0:
        raise ValueError("noise_sd must be non-negative")
    prep = source if isinstance(source, DemeanedSource) else demean_source(source)
    values, observed = _mixed_arrays(prep, n_predictors, n_months, boot_weight, noise_sd, rng)
    ids = [f"mix{i:06d}" for i in range(n_predictors)]
    return _as_panel(values, observed, ids, n_months)


def _synthetic_arrays(source: SyntheticSource, n_predictors, n_months, rng):
    n_blocks = -(-n_predictors // source.block_size)
    common = rng.standard_normal((n_blocks, n_months))
    idio = rng.standard_normal((n_predictors, n_months))
    block_of = np.arange(n_predictors) // source.block_size
    rho = source.within_block_corr
    values = source.idio_sd * (
        math.sqrt(rho) * common[block_of] + math.sqrt(1.0 - rho) * idio
    )
    return values, np.ones_like(values, dtype=bool)


def synthetic_source_panel(
    n_predictors: int,
    n_months: int,
    block_size: int = 20,
    within_block_corr: float = 0.35,
    idio_sd: float = 3.32,
    *,
    rng: np.random.Generator,
) -> ReturnPanel:
    """Block-equicorrelated Gaussian panel used where no source data ships."""
    source = SyntheticSource(block_size, within_block_corr, idio_sd)
    values, observed = _synthetic_arrays(source, n_predictors, n_months, rng)
    ids = [f"syn{i:06d}" for i in range(n_predictors)]
    return _as_panel(values, observed, ids, n_months)


def assemble_panel(mu: np.ndarray, residuals: ReturnPanel) -> ReturnPanel:
    """Expected return plus residual, cellwise; the mask passes through."""
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (residuals.n_predictors,):
        raise DimensionMismatchError(
            f"mu length {mu.shape} != residual predictors {residuals.n_predictors}"
        )
    return ReturnPanel(
        predictor_ids=list(residuals.predictor_ids),
        returns=residuals.returns + mu[:, None],
        observed=residuals.observed.copy(),
        month_labels=list(residuals.month_labels),
    )


def selection_probabilities(abs_t: np.ndarray, rule: SelectionRule) -> np.ndarray:
    """Per-predictor publication probability under the staircase."""
    seg = np.searchsorted(np.asarray(rule.thresholds), abs_t, side="left")
    return np.asarray(rule.probabilities)[seg]


def apply_selection(
    tstats: TStatSample,
    rule: SelectionRule,
    rng: np.random.Generator,
) -> np.ndarray:
    """Indices selected for publication, each independently by segment probability."""
    p = selection_probabilities(tstats.abs_t, rule)
    return np.flatnonzero(rng.random(len(tstats)) < p)


def realized_fdp(labels: TruthLabels, tstats: TStatSample, hurdle: float) -> FdpResult:
    """False and total discoveries at |t| > hurdle; FDP is 0 when nothing is discovered."""
    if len(labels) != len(tstats):
        raise DimensionMismatchError("labels and t-stats must align")
    disc = tstats.abs_t > hurdle
    r = int(disc.sum())
    f = int(np.sum(disc & labels.is_false))
    return FdpResult(r, f, f / r if r > 0 else 0.0)


def _prepare_residual_source(source):
    if isinstance(source, SyntheticSource):
        return source
    if isinstance(source, (ClusterBootstrapSource, MixedBootstrapSource)):
        prep = demean_source(source.source)
        return replace_source(source, prep)
    raise ValueError(f"unknown residual source: {source!r}")


def replace_source(source, prep: DemeanedSource):
    """Bind the de-meaned arrays onto a bootstrap source spec (internal)."""
    bound = _BoundBootstrapSource(prep=prep)
    if isinstance(source, ClusterBootstrapSource):
        bound.mode = "cluster"
    else:
        bound.mode = "mixed"
        bound.boot_weight = source.boot_weight
        bound.noise_sd = source.noise_sd
    return bound


@dataclass
class _BoundBootstrapSource:
    prep: DemeanedSource
    mode: str = "cluster"
    boot_weight: float = 0.65
    noise_sd: float = 3.32


def _draw_residual_arrays(prepared, n_predictors, n_months, rng):
    if isinstance(prepared, SyntheticSource):
        return _synthetic_arrays(prepared, n_predictors, n_months, rng)
    if prepared.mode == "cluster":
        return _cluster_arrays(prepared.prep, n_predictors, n_months, rng)
    return _mixed_arrays(
        prepared.prep, n_predictors, n_months, prepared.boot_weight, prepared.noise_sd, rng
    )


@dataclass(frozen=True)
class ReplicationOutcome:
    fdp: float
    n_discoveries: int
    n_false_discoveries: int
    easy_bound: float | None
    storey_bound: float | None
    extrap_bound: float | None


@dataclass(frozen=True)
class GridCellReport:
    """One simulated (gamma, p_false) cell: actual FDR next to each bound."""

    gamma_bps: float
    p_false: float
    hurdle: float
    n_sims: int
    actual_fdr: float
    mean_easy_bound: float | None
    mean_storey_bound: float | None
    mean_extrap_bound: float | None
    cover_rate_easy: float | None
    cover_rate_storey: float | None
    cover_rate_extrap: float | None
    n_undefined: int
    n_undefined_easy: int
    n_undefined_extrap: int


def _replicate(
    config: SimConfig,
    replication: int,
    prepared,
    hurdle: float,
    bin_spec: StoreyBinSpec,
    null: NullModel,
    selection: SelectionRule | None,
    min_obs: int,
) -> ReplicationOutcome:
    rng = replication_rng(config.seed, replication)
    labels, mu = make_truth_and_mu(config, rng)
    values, observed = _draw_residual_arrays(
        prepared, config.n_predictors, config.n_months, rng
    )
    t, n_obs = masked_tstats(values + mu[:, None], observed, min_obs)
    valid = np.isfinite(t)
    tv = t[valid]
    is_false = labels.is_false[valid]
    n = tv.size

    easy = storey = None
    if n > 0:
        count_above = int(np.sum(tv > hurdle))
        if count_above > 0:
            share_above = count_above / n
            easy_raw = null.tail(hurdle) / share_above
            easy = min(1.0, easy_raw)
            in_bin = np.sum((tv >= bin_spec.lo) & (tv <= bin_spec.hi)) / n
            pf = min(1.0, in_bin / null.bin_mass(bin_spec.lo, bin_spec.hi))
            storey = min(1.0, easy_raw * pf)

    extrap = None
    if selection is None:
        disc = tv > hurdle
        r = int(disc.sum())
        f = int(np.sum(disc & is_false))
    else:
        sel = rng.random(n) < selection_probabilities(tv, selection)
        disc = sel & (tv > hurdle)
        r = int(disc.sum())
        f = int(np.sum(disc & is_false))
        if r > 0:
            mean_pub = float(tv[disc].mean())
            if mean_pub > hurdle:
                extrap = min(
                    1.0, null.tail(hurdle) * math.exp(hurdle / (mean_pub - hurdle))
                )
    return ReplicationOutcome(
        fdp=f / r if r > 0 else 0.0,
        n_discoveries=r,
        n_false_discoveries=f,
        easy_bound=easy,
        storey_bound=storey,
        extrap_bound=extrap,
    )


def _mean_and_cover(outcomes, attr):
    pairs = [
        (getattr(o, attr), o.fdp) for o in outcomes if getattr(o, attr) is not None
    ]
    if not pairs:
        return None, None, len(outcomes)
    bounds = [b for b, _ in pairs]
    covered = [b >= fdp for b, fdp in pairs]
    return (
        float(np.mean(bounds)),
        float(np.mean(covered)),
        len(outcomes) - len(pairs),
    )


def run_replications(
    config: SimConfig,
    hurdle: float = 2.0,
    bin_spec: StoreyBinSpec = DEFAULT_STOREY_BIN,
    null: NullModel = EXACT_NORMAL,
    selection: SelectionRule | None = None,
    min_obs: int = 60,
    threads: int = 1,
) -> list[ReplicationOutcome]:
    """All replication outcomes for a config, in replication order."""
    prepared = _prepare_residual_source(config.residual_source)

    def job(rep: int) -> ReplicationOutcome:
        return _replicate(config, rep, prepared, hurdle, bin_spec, null, selection, min_obs)

    reps = range(config.n_sims)
    if threads <= 1:
        return [job(r) for r in reps]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(job, reps))


def monte_carlo_fdr(
    config: SimConfig,
    hurdle: float = 2.0,
    bin_spec: StoreyBinSpec = DEFAULT_STOREY_BIN,
    null: NullModel = EXACT_NORMAL,
    selection: SelectionRule | None = None,
    min_obs: int = 60,
    threads: int = 1,
) -> GridCellReport:
    """Actual FDR (mean FDP over replications) next to the mean of each bound.

    Replications with no discoveries leave the share-based bounds undefined;
    such replications are excluded from the affected bound's mean and
    coverage and counted. The extrapolation bound is computed only when a
    selection rule is active, from the mean published |t| above the hurdle.
    """
    outcomes = run_replications(config, hurdle, bin_spec, null, selection, min_obs, threads)
    actual_fdr = float(np.mean([o.fdp for o in outcomes]))
    mean_easy, cover_easy, und_easy = _mean_and_cover(outcomes, "easy_bound")
    mean_storey, cover_storey, _ = _mean_and_cover(outcomes, "storey_bound")
    if selection is None:
        mean_extrap, cover_extrap, und_extrap = None, None, 0
    else:
        mean_extrap, cover_extrap, und_extrap = _mean_and_cover(outcomes, "extrap_bound")
    undefined_any = sum(
        1
        for o in outcomes
        if o.easy_bound is None or (selection is not None and o.extrap_bound is None)
    )
    return GridCellReport(
        gamma_bps=float(config.gamma_bps),
        p_false=float(config.p_false),
        hurdle=float(hurdle),
        n_sims=config.n_sims,
        actual_fdr=actual_fdr,
        mean_easy_bound=mean_easy,
        mean_storey_bound=mean_storey,
        mean_extrap_bound=mean_extrap,
        cover_rate_easy=cover_easy,
        cover_rate_storey=cover_storey,
        cover_rate_extrap=cover_extrap,
        n_undefined=undefined_any,
        n_undefined_easy=und_easy,
        n_undefined_extrap=und_extrap,
    )


def simulate_grid(
    base: SimConfig,
    gammas_bps,
    p_falses,
    hurdle: float = 2.0,
    bin_spec: StoreyBinSpec = DEFAULT_STOREY_BIN,
    null: NullModel = EXACT_NORMAL,
    selection: SelectionRule | None = None,
    min_obs: int = 60,
    threads: int = 1,
) -> list[GridCellReport]:
    """monte_carlo_fdr over a (gamma, p_false) grid, row-major in gamma."""
    reports = []
    for gamma in gammas_bps:
        for p_false in p_falses:
            config = replace(base, gamma_bps=float(gamma), p_false=float(p_false))
            reports.append(
                monte_carlo_fdr(config, hurdle, bin_spec, null, selection, min_obs, threads)
            )
    return reports
