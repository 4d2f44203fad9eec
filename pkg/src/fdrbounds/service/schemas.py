"""Request and response models for the HTTP service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field, model_validator

NullKind = Literal["exact", "paper"]


class HealthResponse(BaseModel):
    status: str
    version: str


class BoundReportOut(BaseModel):
    method: str
    hurdle: float
    bound_raw: float
    bound_capped: float
    sample_size: int | None = None
    intermediates: dict[str, float | int | bool | None]


class EasyBoundRequest(BaseModel):
    share_above: float = Field(gt=0, le=1)
    hurdle: float = Field(default=2.0, ge=0)
    null: NullKind = "exact"


class TStatSampleIn(BaseModel):
    abs_t: list[float] = Field(min_length=1)


class EasyBoundFromTstatsRequest(TStatSampleIn):
    hurdle: float = Field(default=2.0, ge=0)
    null: NullKind = "exact"


class StoreyBoundRequest(TStatSampleIn):
    hurdle: float = Field(default=2.0, ge=0)
    bin_lo: float = Field(default=0.0, ge=0)
    bin_hi: float = 0.5
    null: NullKind = "exact"

    @model_validator(mode="after")
    def _bin_ordered(self):
        if not self.bin_lo < self.bin_hi:
            raise ValueError("bin must satisfy lo < hi")
        return self


class ExtrapolationRequest(BaseModel):
    mean_pub_t: float
    hurdle: float = Field(default=2.0, ge=0)
    null: NullKind = "exact"


class PfBoundOut(BaseModel):
    value: float
    raw: float
    share: float
    null_mass: float
    cap_applied: bool
    count: int | None = None
    sample_size: int | None = None


class IntervalPfRequest(BaseModel):
    share_in_interval: float = Field(gt=0, le=1)
    lo: float
    hi: float
    null: NullKind = "exact"

    @model_validator(mode="after")
    def _ordered(self):
        if not self.lo < self.hi:
            raise ValueError("interval must satisfy lo < hi")
        return self


class PluginRowIn(BaseModel):
    label: str
    kind: Literal["tail_share", "mean_pub_t"]
    value: float


class PluginTableRequest(BaseModel):
    rows: list[PluginRowIn]
    hurdle: float = Field(default=2.0, ge=0)
    null: NullKind = "exact"


class PluginRowOut(BaseModel):
    label: str
    kind: str
    value: float
    bound: BoundReportOut | None = None
    error: str | None = None


class DecompositionRequest(TStatSampleIn):
    scaling: Literal["easy", "storey"] = "storey"
    bin_width: float = Field(default=0.5, gt=0)
    hurdle: float = Field(default=2.0, ge=0)
    null: NullKind = "exact"


class DecompositionBinOut(BaseModel):
    lo: float
    hi: float
    count_empirical: int
    count_null_scaled: float
    count_true_implied: float
    false_share: float | None = None


class DecompositionOut(BaseModel):
    bins: list[DecompositionBinOut]
    scaling: str
    pf: float
    null_scale: float
    null_tail_beyond: float
    sample_size: int
    hurdle: float
    count_above: int
    share_above: float
    null_above_scaled: float
    fdr_bound_raw: float | None = None
    fdr_bound_capped: float | None = None


class HurdleRequest(TStatSampleIn):
    method: Literal["bh95", "by13"] = "bh95"
    q_star: float = Field(gt=0, lt=1)
    null: NullKind = "exact"


class HurdleOut(BaseModel):
    feasible: bool
    hurdle: float | None = None
    n_discoveries: int
    discoveries: list[int]
    fdr_bound_at_hurdle: float | None = None
    penalty: float
    n_tests: int


class BonferroniRequest(BaseModel):
    m_tests: int = Field(ge=1)
    level: float = Field(default=0.05, gt=0, lt=1)
    null: NullKind = "exact"


class BonferroniOut(BaseModel):
    hurdle: float


class PanelRowIn(BaseModel):
    predictor_id: str
    month: str
    ret: float | None = None  # None marks a missing observation


class TstatsRequest(BaseModel):
    rows: list[PanelRowIn] = Field(min_length=1)
    min_obs: int = Field(default=60, ge=2)


class PredictorTstatOut(BaseModel):
    predictor_id: str
    abs_t: float
    n_obs: int


class ExclusionOut(BaseModel):
    predictor_id: str
    reason: str
    n_obs: int


class TstatsResponse(BaseModel):
    predictors: list[PredictorTstatOut]
    excluded: list[ExclusionOut]


class SummaryRequest(TStatSampleIn):
    hurdles: list[float] = [2.0]
    bins: list[tuple[float, float]] = [(0.0, 0.5)]


class SummaryRowOut(BaseModel):
    stat: str
    threshold_or_bin: str
    count: int
    share: float


class SyntheticSourceIn(BaseModel):
    kind: Literal["synthetic"] = "synthetic"
    block_size: int = Field(default=20, ge=1)
    within_block_corr: float = Field(default=0.35, ge=0, lt=1)
    idio_sd: float = Field(default=3.32, gt=0)


class SimulateRequest(BaseModel):
    n_predictors: int = Field(ge=1)
    n_months: int = Field(ge=1)
    gamma_bps: float = 0.0
    p_false: float = Field(default=1.0, ge=0, le=1)
    residual_source: SyntheticSourceIn = SyntheticSourceIn()
    seed: int = Field(default=0, ge=0)
    n_sims: int = Field(default=1, ge=1)
    hurdle: float = Field(default=2.0, ge=0)
    bin_lo: float = Field(default=0.0, ge=0)
    bin_hi: float = 0.5
    null: NullKind = "exact"
    selection: bool = False
    s_bar: float = Field(default=1.0, gt=0, le=1)
    min_obs: int = Field(default=60, ge=2)


class GridCellOut(BaseModel):
    gamma_bps: float
    p_false: float
    hurdle: float
    n_sims: int
    actual_fdr: float
    mean_easy_bound: float | None = None
    mean_storey_bound: float | None = None
    mean_extrap_bound: float | None = None
    cover_rate_easy: float | None = None
    cover_rate_storey: float | None = None
    cover_rate_extrap: float | None = None
    n_undefined: int
    n_undefined_easy: int
    n_undefined_extrap: int


class HlzParamsIn(BaseModel):
    p0: float = Field(default=0.444, ge=0, le=1)
    lambda_bps: float = Field(default=55.5, gt=0)
    se_bps: float | None = Field(default=None, gt=0)
    rho: float = Field(default=0.2, ge=0, lt=1)
    n_factors: int = Field(default=1378, ge=1)
    s_bar: float = Field(default=1.0, gt=0, le=1)


class HlzCurveRequest(HlzParamsIn):
    hurdles: list[float] = Field(default=[2.0, 2.27, 2.95], min_length=1)
    n_sims: int = Field(default=200, ge=1)
    seed: int = Field(default=0, ge=0)
    published_only: bool = False


class HlzCurvePointOut(BaseModel):
    hurdle: float
    n_sims: int
    mean_fdr: float
    mean_discoveries: float
    mean_false_discoveries: float
    reference_fdr: float | None = None


class HlzShareRequest(HlzParamsIn):
    lower: float
    upper: float
    n_sims: int = Field(default=200, ge=1)
    seed: int = Field(default=0, ge=0)


class HlzShareOut(BaseModel):
    share_above_upper: float
    implied_fdr_ceiling: float | None = None
    fdr_at_upper: float | None = None
