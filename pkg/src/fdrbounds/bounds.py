"""FDR bound estimators.

All bounds compare a null tail (or bin mass) with its empirical counterpart:

* easy bound: null tail above the hurdle divided by the empirical share
  above the hurdle; equivalent to assuming every predictor is null.
* false-share bound ("pf"): empirical mass of small |t| divided by the null
  mass of the same bin, capped at 1; an upper bound on the share of null
  predictors.
* combined (Storey-style) bound: easy bound times the false-share bound.
* exponential extrapolation: treats the |t| population as exponential, so
  the population mean is the mean published t-stat minus the hurdle
  (memorylessness), which yields the tail share by extrapolation.
* signed-interval false-share bound: the pf bound for a possibly
  asymmetric interval of signed t-stats.

Every operation returns the raw ratio alongside a capped-at-1 value and
enough intermediates to recompute the result exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptySampleError,
    InfeasibleExtrapolationError,
    NoDiscoveriesError,
)
from .nulls import EXACT_NORMAL, NullModel
from .panel import TStatSample

DEFAULT_HURDLE = 2.0


@dataclass(frozen=True)
class StoreyBinSpec:
    """Closed bin of small absolute t-stats used to bound the null share."""

    lo: float = 0.0
    hi: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 <= self.lo < self.hi:
            raise ValueError("bin must satisfy 0 <= lo < hi")


DEFAULT_STOREY_BIN = StoreyBinSpec(0.0, 0.5)


@dataclass(frozen=True)
class FdrBoundReport:
    method: str  # easy | storey | extrapolation | interval_pf
    hurdle: float
    bound_raw: float
    bound_capped: float
    intermediates: dict = field(default_factory=dict)
    sample_size: int | None = None

    def to_flat_dict(self) -> dict:
        out = {
            "method": self.method,
            "hurdle": self.hurdle,
            "bound_raw": self.bound_raw,
            "bound_capped": self.bound_capped,
            "sample_size": self.sample_size,
        }
        out.update(self.intermediates)
        return out


@dataclass(frozen=True)
class PfBound:
    """Upper bound on the share of null (false) predictors."""

    value: float  # capped at 1
    raw: float
    share: float
    null_mass: float
    cap_applied: bool
    count: int | None = None
    sample_size: int | None = None


def _capped(raw: float) -> tuple[float, bool]:
    return (1.0, True) if raw > 1.0 else (float(raw), False)


def _check_share(share: float, what: str) -> float:
    share = float(share)
    if share <= 0.0:
        raise NoDiscoveriesError(
            f"{what} must be positive: with no mass there is nothing to bound"
        )
    if share > 1.0:
        raise ValueError(f"{what} must lie in (0, 1]")
    return share


def easy_bound(
    share_above: float,
    hurdle: float = DEFAULT_HURDLE,
    null: NullModel = EXACT_NORMAL,
) -> FdrBoundReport:
    """Null tail above the hurdle divided by the share of |t| above it."""
    share_above = _check_share(share_above, "share_above")
    null_tail = null.tail(hurdle)
    raw = null_tail / share_above
    capped, cap = _capped(raw)
    return FdrBoundReport(
        method="easy",
        hurdle=float(hurdle),
        bound_raw=float(raw),
        bound_capped=capped,
        intermediates={
            "share_above": share_above,
            "null_tail": null_tail,
            "cap_applied": cap,
        },
    )


def easy_bound_from_tstats(
    tstats: TStatSample,
    hurdle: float = DEFAULT_HURDLE,
    null: NullModel = EXACT_NORMAL,
) -> FdrBoundReport:
    """The easy bound with the share above the hurdle counted from a sample."""
    n = len(tstats)
    if n == 0:
        raise EmptySampleError("cannot bound an empty t-stat sample")
    count = int(np.sum(tstats.abs_t > hurdle))
    if count == 0:
        raise NoDiscoveriesError(
            f"no |t| exceeds hurdle {hurdle}: the easy bound is undefined"
        )
    report = easy_bound(count / n, hurdle, null)
    inter = dict(report.intermediates)
    inter["count_above"] = count
    return FdrBoundReport(
        method=report.method,
        hurdle=report.hurdle,
        bound_raw=report.bound_raw,
        bound_capped=report.bound_capped,
        intermediates=inter,
        sample_size=n,
    )


def storey_pf_bound_from_share(
    share_in_bin: float,
    bin_spec: StoreyBinSpec = DEFAULT_STOREY_BIN,
    null: NullModel = EXACT_NORMAL,
) -> PfBound:
    """Share of |t| in a small bin over the null mass of that bin, capped at 1."""
    share = float(share_in_bin)
    if not 0.0 <= share <= 1.0:
        raise ValueError("share_in_bin must lie in [0, 1]")
    mass = null.bin_mass(bin_spec.lo, bin_spec.hi)
    if mass <= 0.0:
        raise ValueError("null bin mass must be positive")
    raw = share / mass
    value, cap = _capped(raw)
    return PfBound(value=value, raw=float(raw), share=share, null_mass=mass, cap_applied=cap)


def storey_pf_bound(
    tstats: TStatSample,
    bin_spec: StoreyBinSpec = DEFAULT_STOREY_BIN,
    null: NullModel = EXACT_NORMAL,
) -> PfBound:
    """The false-share bound with the bin share counted from a sample."""
    n = len(tstats)
    if n == 0:
        raise EmptySampleError("cannot bound an empty t-stat sample")
    count = int(np.sum((tstats.abs_t >= bin_spec.lo) & (tstats.abs_t <= bin_spec.hi)))
    base = storey_pf_bound_from_share(count / n, bin_spec, null)
    return PfBound(
        value=base.value,
        raw=base.raw,
        share=base.share,
        null_mass=base.null_mass,
        cap_applied=base.cap_applied,
        count=count,
        sample_size=n,
    )


def _combine_storey(easy_report: FdrBoundReport, pf: PfBound) -> FdrBoundReport:
    raw = easy_report.bound_raw * pf.value
    capped, cap = _capped(raw)
    inter = dict(easy_report.intermediates)
    inter.pop("cap_applied", None)
    inter.update(
        {
            "easy_bound_raw": easy_report.bound_raw,
            "share_in_bin": pf.share,
            "null_bin_mass": pf.null_mass,
            "pf_raw": pf.raw,
            "pf_bound": pf.value,
            "pf_cap_applied": pf.cap_applied,
            "cap_applied": cap,
        }
    )
    return FdrBoundReport(
        method="storey",
        hurdle=easy_report.hurdle,
        bound_raw=float(raw),
        bound_capped=capped,
        intermediates=inter,
        sample_size=easy_report.sample_size,
    )


def storey_fdr_bound(
    tstats: TStatSample,
    hurdle: float = DEFAULT_HURDLE,
    bin_spec: StoreyBinSpec = DEFAULT_STOREY_BIN,
    null: NullModel = EXACT_NORMAL,
) -> FdrBoundReport:
    """Easy bound times the false-share bound, both counted from the sample."""
    easy_report = easy_bound_from_tstats(tstats, hurdle, null)
    pf = storey_pf_bound(tstats, bin_spec, null)
    return _combine_storey(easy_report, pf)


def storey_fdr_bound_from_shares(
    share_above: float,
    share_in_bin: float,
    hurdle: float = DEFAULT_HURDLE,
    bin_spec: StoreyBinSpec = DEFAULT_STOREY_BIN,
    null: NullModel = EXACT_NORMAL,
) -> FdrBoundReport:
    """The combined bound evaluated from reported summary shares."""
    easy_report = easy_bound(share_above, hurdle, null)
    pf = storey_pf_bound_from_share(share_in_bin, bin_spec, null)
    return _combine_storey(easy_report, pf)


def extrapolation_bound_from_mean(
    mean_abs_t: float,
    hurdle: float = DEFAULT_HURDLE,
    null: NullModel = EXACT_NORMAL,
) -> FdrBoundReport:
    """Easy bound with the tail share implied by an exponential |t| population
    of the given mean: share above h is exp(-h/mean)."""
    mean_abs_t = float(mean_abs_t)
    if mean_abs_t <= 0.0:
        raise InfeasibleExtrapolationError("exponential mean must be positive")
    tail_share = math.exp(-hurdle / mean_abs_t)
    null_tail = null.tail(hurdle)
    raw = null_tail / tail_share
    capped, cap = _capped(raw)
    return FdrBoundReport(
        method="extrapolation",
        hurdle=float(hurdle),
        bound_raw=float(raw),
        bound_capped=capped,
        intermediates={
            "implied_mean_abs_t": mean_abs_t,
            "implied_tail_share": tail_share,
            "null_tail": null_tail,
            "cap_applied": cap,
        },
    )


def exp_extrap_bound(
    mean_pub_t: float,
    hurdle: float = DEFAULT_HURDLE,
    null: NullModel = EXACT_NORMAL,
) -> FdrBoundReport:
    """Extrapolation bound from the mean t-stat among |t| above the hurdle.

    Memorylessness of the exponential gives the population mean as
    mean_pub_t - hurdle; that subtraction happens here, so callers pass
    published means as printed.
    """
    mean_pub_t = float(mean_pub_t)
    if mean_pub_t <= hurdle:
        raise InfeasibleExtrapolationError(
            f"mean published t-stat {mean_pub_t} must exceed the hurdle {hurdle}"
        )
    report = extrapolation_bound_from_mean(mean_pub_t - hurdle, hurdle, null)
    inter = dict(report.intermediates)
    inter["mean_pub_t"] = mean_pub_t
    return FdrBoundReport(
        method=report.method,
        hurdle=report.hurdle,
        bound_raw=report.bound_raw,
        bound_capped=report.bound_capped,
        intermediates=inter,
    )


def interval_pf_bound(
    share_in_interval: float,
    interval: tuple[float, float],
    null: NullModel = EXACT_NORMAL,
) -> PfBound:
    """False-share bound for a signed, possibly asymmetric, t interval."""
    share = float(share_in_interval)
    if not 0.0 < share <= 1.0:
        raise ValueError("share_in_interval must lie in (0, 1]")
    lo, hi = float(interval[0]), float(interval[1])
    mass = null.signed_interval_mass(lo, hi)
    if mass <= 0.0:
        raise ValueError("null interval mass must be positive")
    raw = share / mass
    value, cap = _capped(raw)
    return PfBound(value=value, raw=float(raw), share=share, null_mass=mass, cap_applied=cap)


@dataclass(frozen=True)
class PluginEntry:
    label: str
    kind: str  # tail_share | mean_pub_t
    value: float
    report: FdrBoundReport | None
    error: str | None = None


def plugin_table(
    rows,
    hurdle: float = DEFAULT_HURDLE,
    null: NullModel = EXACT_NORMAL,
) -> list[PluginEntry]:
    """Dispatch (label, kind, value) rows of reported summary statistics to the
    matching bound; a bad row reports its error inline without affecting others."""
    out: list[PluginEntry] = []
    for label, kind, value in rows:
        try:
            if kind == "tail_share":
                report = easy_bound(value, hurdle, null)
            elif kind == "mean_pub_t":
                report = exp_extrap_bound(value, hurdle, null)
            else:
                raise ValueError(f"unknown plugin row kind: {kind!r}")
            out.append(PluginEntry(label, kind, float(value), report))
        except Exception as exc:  # per-row isolation is the contract
            out.append(PluginEntry(label, kind, float(value), None, str(exc)))
    return out


@dataclass(frozen=True)
class DecompositionBin:
    lo: float
    hi: float
    count_empirical: int
    count_null_scaled: float
    count_true_implied: float
    false_share: float | None


@dataclass(frozen=True)
class HistogramDecomposition:
    """Empirical |t| histogram split into null and implied-true components."""

    bins: list[DecompositionBin]
    scaling: str  # "easy" (null share 1) or "storey" (first bin fit to 100%)
    pf: float
    null_scale: float  # total scaled null count, including beyond the last edge
    null_tail_beyond: float
    sample_size: int
    hurdle: float
    count_above: int
    share_above: float
    null_above_scaled: float
    fdr_bound_raw: float | None
    fdr_bound_capped: float | None


def histogram_decomposition(
    tstats: TStatSample,
    null: NullModel = EXACT_NORMAL,
    scaling: str = "storey",
    bin_width: float = 0.5,
    hurdle: float = DEFAULT_HURDLE,
) -> HistogramDecomposition:
    """Per-bin counts of the sample against a scaled null over [0, max|t|].

    Easy scaling sets the null component to the full sample size; storey
    scaling shrinks it by the false-share bound of the first bin. Implied
    true counts are empirical minus scaled null and may be negative under
    easy scaling. The discovery region above the hurdle carries its own
    null-to-empirical ratio, which is the matching FDR bound.
    """
    if scaling not in ("easy", "storey"):
        raise ValueError("scaling must be 'easy' or 'storey'")
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    n = len(tstats)
    if n == 0:
        raise EmptySampleError("cannot decompose an empty t-stat sample")
    t = tstats.abs_t
    n_bins = max(1, int(math.ceil(float(t.max()) / bin_width)))
    edges = np.arange(n_bins + 1) * bin_width
    counts, _ = np.histogram(t, bins=edges)
    if scaling == "storey":
        pf = storey_pf_bound(tstats, StoreyBinSpec(0.0, bin_width), null).value
    else:
        pf = 1.0
    scale = n * pf
    bins: list[DecompositionBin] = []
    for i in range(n_bins):
        lo, hi = float(edges[i]), float(edges[i + 1])
        null_count = scale * null.bin_mass(lo, hi)
        empirical = int(counts[i])
        false_share = (null_count / empirical) if empirical > 0 else None
        bins.append(
            DecompositionBin(
                lo=lo,
                hi=hi,
                count_empirical=empirical,
                count_null_scaled=float(null_count),
                count_true_implied=float(empirical - null_count),
                false_share=false_share,
            )
        )
    count_above = int(np.sum(t > hurdle))
    share_above = count_above / n
    null_above = scale * null.tail(hurdle)
    if count_above > 0:
        raw = null_above / count_above
        capped, _ = _capped(raw)
    else:
        raw, capped = None, None
    return HistogramDecomposition(
        bins=bins,
        scaling=scaling,
        pf=float(pf),
        null_scale=float(scale),
        null_tail_beyond=float(scale * null.tail(float(edges[-1]))),
        sample_size=n,
        hurdle=float(hurdle),
        count_above=count_above,
        share_above=float(share_above),
        null_above_scaled=float(null_above),
        fdr_bound_raw=raw,
        fdr_bound_capped=capped,
    )
