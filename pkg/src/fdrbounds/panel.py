"""Return panels, factor panels, and t-statistic computation.

Panels hold N predictors by T months of long-short returns in percent per
month, with an explicit observation mask. t-stats divide the mean return by
its sample standard deviation (n-1 denominator) and scale by sqrt(months
used); months are used pairwise per predictor, with a configurable floor.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DataError,
    DimensionMismatchError,
    DuplicateKeyError,
    EmptySampleError,
    NoParsableRowsError,
)

DEFAULT_MIN_OBS = 60


@dataclass
class ReturnPanel:
    """N predictors x T months of long-short returns (percent per month)."""

    predictor_ids: list[str]
    returns: np.ndarray
    observed: np.ndarray
    month_labels: list[str]

    def __post_init__(self) -> None:
        self.returns = np.asarray(self.returns, dtype=float)
        self.observed = np.asarray(self.observed, dtype=bool)
        if self.returns.ndim != 2:
            raise DimensionMismatchError("returns must be a 2-d array")
        n, t = self.returns.shape
        if n < 1 or t < 1:
            raise DataError("panel needs at least one predictor and one month")
        if self.observed.shape != (n, t):
            raise DimensionMismatchError(
                f"observed mask shape {self.observed.shape} != returns shape {(n, t)}"
            )
        if len(self.predictor_ids) != n:
            raise DimensionMismatchError("predictor_ids length != number of rows")
        if len(self.month_labels) != t:
            raise DimensionMismatchError("month_labels length != number of columns")
        if len(set(self.predictor_ids)) != n:
            raise DataError("predictor ids must be unique")
        if any(a >= b for a, b in zip(self.month_labels, self.month_labels[1:])):
            raise DataError("month labels must be strictly increasing")
        if not np.all(np.isfinite(self.returns[self.observed])):
            raise DataError("observed returns must be finite")

    @property
    def n_predictors(self) -> int:
        return self.returns.shape[0]

    @property
    def n_months(self) -> int:
        return self.returns.shape[1]


@dataclass
class FactorPanel:
    """T months x K factor returns (percent per month), no missing values."""

    factor_names: list[str]
    values: np.ndarray
    month_labels: list[str]

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise DimensionMismatchError("factor values must be a 2-d array")
        t, k = self.values.shape
        if k < 1:
            raise DataError("factor panel needs at least one factor")
        if len(self.factor_names) != k:
            raise DimensionMismatchError("factor_names length != number of columns")
        if len(set(self.factor_names)) != k:
            raise DataError("factor names must be unique")
        if len(self.month_labels) != t:
            raise DimensionMismatchError("month_labels length != number of rows")
        if any(a >= b for a, b in zip(self.month_labels, self.month_labels[1:])):
            raise DataError("month labels must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise DataError("factor returns must be finite")


@dataclass
class TStatSample:
    """Absolute t-statistics plus per-predictor month counts and provenance."""

    abs_t: np.ndarray
    n_obs_used: np.ndarray
    source_tag: str = ""
    predictor_ids: list[str] | None = None

    def __post_init__(self) -> None:
        self.abs_t = np.asarray(self.abs_t, dtype=float)
        self.n_obs_used = np.asarray(self.n_obs_used, dtype=int)
        if self.abs_t.ndim != 1 or self.n_obs_used.ndim != 1:
            raise DimensionMismatchError("abs_t and n_obs_used must be 1-d")
        if self.abs_t.shape != self.n_obs_used.shape:
            raise DimensionMismatchError("abs_t and n_obs_used lengths differ")
        if self.predictor_ids is not None and len(self.predictor_ids) != len(self.abs_t):
            raise DimensionMismatchError("predictor_ids length != abs_t length")
        if self.abs_t.size and (not np.all(np.isfinite(self.abs_t)) or np.any(self.abs_t < 0)):
            raise DataError("abs_t values must be finite and non-negative")

    def __len__(self) -> int:
        return int(self.abs_t.size)


@dataclass(frozen=True)
class Exclusion:
    """Why a predictor produced no t-stat."""

    predictor_id: str
    reason: str  # below_min_obs | zero_variance | rank_deficient | degenerate_fit
    n_obs: int


@dataclass
class TStatResult:
    sample: TStatSample
    excluded: list[Exclusion] = field(default_factory=list)


@dataclass
class LoadReport:
    """What happened while parsing a panel file."""

    n_data_rows: int = 0
    n_missing_cells: int = 0
    missing_cells: list[tuple[str, str]] = field(default_factory=list)


def _parse_return_cell(text: str) -> float | None:
    """A blank or non-numeric (or non-finite) cell is a missing observation."""
    s = text.strip()
    if not s:
        return None
    try:
        v = float(s)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def load_panel_csv(
    path,
    *,
    wide: bool = False,
    delimiter: str = ",",
) -> tuple[ReturnPanel, LoadReport]:
    """Load a return panel from CSV.

    Long format (default) expects the header ``predictor_id,month,ret``;
    wide format expects ``predictor_id`` followed by one column per month.
    Unparseable return cells become unobserved entries, counted in the
    returned LoadReport.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh, delimiter=delimiter))
    if not rows:
        raise NoParsableRowsError(f"{path}: file is empty")
    header, data_rows = rows[0], rows[1:]
    if wide:
        return _build_wide(path, header, data_rows)
    return _build_long(path, header, data_rows)


def _build_long(path, header, data_rows) -> tuple[ReturnPanel, LoadReport]:
    names = [c.strip().lower() for c in header[:3]]
    if names != ["predictor_id", "month", "ret"]:
        raise DataError(
            f"{path}: long-format header must be predictor_id,month,ret (got {header[:3]})"
        )
    report = LoadReport()
    cells: dict[tuple[str, str], float | None] = {}
    ids: list[str] = []
    seen_ids: set[str] = set()
    months: set[str] = set()
    for row in data_rows:
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) < 3:
            raise DataError(f"{path}: long-format row needs 3 fields, got {row}")
        pid, month = row[0].strip(), row[1].strip()
        key = (pid, month)
        if key in cells:
            raise DuplicateKeyError(
                f"{path}: duplicate (predictor, month) pair: ({pid}, {month})"
            )
        value = _parse_return_cell(row[2])
        cells[key] = value
        report.n_data_rows += 1
        if value is None:
            report.n_missing_cells += 1
            report.missing_cells.append(key)
        if pid not in seen_ids:
            seen_ids.add(pid)
            ids.append(pid)
        months.add(month)
    if report.n_data_rows == 0:
        raise NoParsableRowsError(f"{path}: no data rows")
    if report.n_data_rows == report.n_missing_cells:
        raise NoParsableRowsError(f"{path}: no parsable return values")
    month_labels = sorted(months)
    col = {m: j for j, m in enumerate(month_labels)}
    row_of = {pid: i for i, pid in enumerate(ids)}
    returns = np.zeros((len(ids), len(month_labels)))
    observed = np.zeros_like(returns, dtype=bool)
    for (pid, month), value in cells.items():
        if value is not None:
            returns[row_of[pid], col[month]] = value
            observed[row_of[pid], col[month]] = True
    return ReturnPanel(ids, returns, observed, month_labels), report


def _build_wide(path, header, data_rows) -> tuple[ReturnPanel, LoadReport]:
    if len(header) < 2:
        raise DataError(f"{path}: wide-format header needs months after predictor_id")
    raw_months = [c.strip() for c in header[1:]]
    if len(set(raw_months)) != len(raw_months):
        raise DuplicateKeyError(f"{path}: duplicate month columns in header")
    order = sorted(range(len(raw_months)), key=lambda j: raw_months[j])
    month_labels = [raw_months[j] for j in order]
    report = LoadReport()
    ids: list[str] = []
    seen: set[str] = set()
    value_rows: list[list[float | None]] = []
    for row in data_rows:
        if not row or all(not c.strip() for c in row):
            continue
        pid = row[0].strip()
        if pid in seen:
            raise DuplicateKeyError(f"{path}: duplicate predictor row: {pid}")
        seen.add(pid)
        ids.append(pid)
        cells = row[1:]
        parsed: list[float | None] = []
        for j in order:
            text = cells[j] if j < len(cells) else ""
            value = _parse_return_cell(text)
            parsed.append(value)
            report.n_data_rows += 1
            if value is None:
                report.n_missing_cells += 1
                report.missing_cells.append((pid, raw_months[j]))
        value_rows.append(parsed)
    if not ids:
        raise NoParsableRowsError(f"{path}: no data rows")
    if report.n_data_rows == report.n_missing_cells:
        raise NoParsableRowsError(f"{path}: no parsable return values")
    returns = np.zeros((len(ids), len(month_labels)))
    observed = np.zeros_like(returns, dtype=bool)
    for i, parsed in enumerate(value_rows):
        for j, value in enumerate(parsed):
            if value is not None:
                returns[i, j] = value
                observed[i, j] = True
    return ReturnPanel(ids, returns, observed, month_labels), report


def load_factor_csv(path, *, delimiter: str = ",") -> FactorPanel:
    """Load a factor panel: header ``month,<factor1>,<factor2>,...``."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh, delimiter=delimiter))
    if not rows:
        raise NoParsableRowsError(f"{path}: file is empty")
    header = [c.strip() for c in rows[0]]
    if len(header) < 2 or header[0].lower() != "month":
        raise DataError(f"{path}: factor header must be month,<factor names>")
    names = header[1:]
    months: list[str] = []
    values: list[list[float]] = []
    for row in rows[1:]:
        if not row or all(not c.strip() for c in row):
            continue
        month = row[0].strip()
        cells = row[1:]
        if len(cells) < len(names):
            raise DataError(f"{path}: factor row for {month} is short")
        parsed = []
        for name, cell in zip(names, cells):
            v = _parse_return_cell(cell)
            if v is None:
                raise DataError(f"{path}: factor {name} unparseable in month {month}")
            parsed.append(v)
        months.append(month)
        values.append(parsed)
    if not months:
        raise NoParsableRowsError(f"{path}: no data rows")
    if len(set(months)) != len(months):
        raise DuplicateKeyError(f"{path}: duplicate month rows")
    order = sorted(range(len(months)), key=lambda i: months[i])
    return FactorPanel(
        factor_names=names,
        values=np.asarray([values[i] for i in order]),
        month_labels=[months[i] for i in order],
    )


def masked_tstats(returns: np.ndarray, observed: np.ndarray, min_obs: int):
    """Vectorized |mean/sd*sqrt(n)| per row over observed cells.

    Rows below min_obs observations or with zero sample variance get NaN.
    Returns (abs_t, n_obs) arrays.
    """
    obs = np.asarray(observed, dtype=bool)
    r = np.asarray(returns, dtype=float)
    n = obs.sum(axis=1)
    safe_n = np.maximum(n, 1)
    mean = np.where(obs, r, 0.0).sum(axis=1) / safe_n
    dev = np.where(obs, r - mean[:, None], 0.0)
    ss = (dev * dev).sum(axis=1)
    sd = np.sqrt(ss / np.maximum(n - 1, 1))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.abs(mean / sd) * np.sqrt(n)
    t = np.where((n >= min_obs) & (sd > 0.0), t, np.nan)
    return t, n.astype(int)


def compute_tstats(
    panel: ReturnPanel,
    min_obs: int = DEFAULT_MIN_OBS,
    source_tag: str = "raw",
) -> TStatResult:
    """Raw t-stats per predictor over its observed months.

    Predictors with fewer than min_obs months, or with zero sample standard
    deviation, are excluded with a diagnostic rather than raising.
    """
    if min_obs < 2:
        raise ValueError("min_obs must be at least 2")
    t, n_obs = masked_tstats(panel.returns, panel.observed, min_obs)
    keep: list[int] = []
    excluded: list[Exclusion] = []
    for i, pid in enumerate(panel.predictor_ids):
        if np.isfinite(t[i]):
            keep.append(i)
        else:
            reason = "below_min_obs" if n_obs[i] < min_obs else "zero_variance"
            excluded.append(Exclusion(pid, reason, int(n_obs[i])))
    sample = TStatSample(
        abs_t=t[keep],
        n_obs_used=n_obs[keep],
        source_tag=source_tag,
        predictor_ids=[panel.predictor_ids[i] for i in keep],
    )
    return TStatResult(sample, excluded)


def compute_alpha_tstats(
    panel: ReturnPanel,
    factors: FactorPanel,
    model: list[str],
    min_obs: int = DEFAULT_MIN_OBS,
    source_tag: str | None = None,
) -> TStatResult:
    """Intercept t-stats from per-predictor OLS on the selected factors.

    Standard errors are homoskedastic OLS. Factor columns that are
    identically zero over a predictor's sample are ignored; with no factor
    columns left the computation reduces to compute_tstats. A genuinely
    rank-deficient regressor matrix excludes the predictor with a
    diagnostic, as does a perfect fit with a nonzero intercept.
    """
    if panel.month_labels != factors.month_labels:
        raise DataError("panel and factor months do not align")
    unknown = [m for m in model if m not in factors.factor_names]
    if unknown:
        raise DataError(f"unknown factor names: {unknown}")
    tag = source_tag if source_tag is not None else "+".join(model) or "raw"
    if not model:
        return compute_tstats(panel, min_obs=min_obs, source_tag=tag)
    k = len(model)
    if min_obs < k + 2:
        raise ValueError("min_obs must be at least number of factors + 2")
    cols = [factors.factor_names.index(m) for m in model]
    fmat = factors.values[:, cols]

    abs_t: list[float] = []
    n_used: list[int] = []
    ids: list[str] = []
    excluded: list[Exclusion] = []
    for i, pid in enumerate(panel.predictor_ids):
        obs = panel.observed[i]
        y = panel.returns[i, obs]
        n = y.size
        if n < min_obs:
            excluded.append(Exclusion(pid, "below_min_obs", int(n)))
            continue
        x = np.column_stack([np.ones(n), fmat[obs]])
        keep_cols = [0] + [j for j in range(1, k + 1) if np.any(x[:, j] != 0.0)]
        x = x[:, keep_cols]
        if x.shape[1] == 1:
            m = float(y.mean())
            s = float(y.std(ddof=1))
            if s == 0.0:
                excluded.append(Exclusion(pid, "zero_variance", int(n)))
                continue
            t = abs(m / s) * math.sqrt(n)
        else:
            t = _alpha_tstat(y, x)
            if t is None:
                excluded.append(Exclusion(pid, "rank_deficient", int(n)))
                continue
            if math.isnan(t):
                excluded.append(Exclusion(pid, "degenerate_fit", int(n)))
                continue
        abs_t.append(float(t))
        n_used.append(int(n))
        ids.append(pid)
    sample = TStatSample(np.asarray(abs_t), np.asarray(n_used, dtype=int), tag, ids)
    return TStatResult(sample, excluded)


def _alpha_tstat(y: np.ndarray, x: np.ndarray) -> float | None:
    """|intercept / homoskedastic SE|; None if rank deficient, NaN if the fit
    is numerically perfect with a nonzero intercept."""
    n, p = x.shape
    beta, _, rank, _ = np.linalg.lstsq(x, y, rcond=None)
    if rank < p:
        return None
    resid = y - x @ beta
    rss = float(resid @ resid)
    yy = float(y @ y)
    if rss <= 1e-24 * max(yy, 1e-300):
        # residuals at rounding level: se is 0, so t is 0 only if alpha is too
        y_scale = math.sqrt(yy / n) if yy > 0 else 0.0
        if abs(beta[0]) <= 1e-10 * max(y_scale, 1e-300):
            return 0.0
        return float("nan")
    sigma2 = rss / (n - p)
    g = np.linalg.inv(x.T @ x)
    se = math.sqrt(sigma2 * g[0, 0])
    return abs(float(beta[0])) / se


@dataclass(frozen=True)
class SummaryRow:
    stat: str  # "above" or "bin"
    threshold_or_bin: str
    count: int
    share: float


def panel_summary(
    tstats: TStatSample,
    hurdles=(2.0,),
    bins=((0.0, 0.5),),
) -> list[SummaryRow]:
    """Empirical shares above each hurdle (strict) and inside each closed bin."""
    n = len(tstats)
    if n == 0:
        raise EmptySampleError("cannot summarize an empty t-stat sample")
    rows: list[SummaryRow] = []
    for h in hurdles:
        if h < 0:
            raise ValueError("hurdles must be non-negative")
        count = int(np.sum(tstats.abs_t > h))
        rows.append(SummaryRow("above", repr(float(h)), count, count / n))
    for lo, hi in bins:
        if not 0.0 <= lo <= hi:
            raise ValueError("bins must satisfy 0 <= lo <= hi")
        count = int(np.sum((tstats.abs_t >= lo) & (tstats.abs_t <= hi)))
        rows.append(
            SummaryRow("bin", f"[{float(lo)!r},{float(hi)!r}]", count, count / n)
        )
    return rows
