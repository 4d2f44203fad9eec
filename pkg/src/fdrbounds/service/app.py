"""HTTP front end over the library operations.

Stateless JSON endpoints wrap the same functions the CLI calls. Data
errors map to 400, infeasible computations (e.g. no discoveries above the
hurdle) to 409, validation problems to 422. Bootstrap-source simulations
need panel files and stay CLI-only; the simulate endpoint runs the
synthetic residual source.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import bounds as bnd
from .. import control as ctl
from .. import hlz as hlzmod
from .. import simkit as sim
from ..errors import DataError, InfeasibleError
from ..nulls import null_model
from ..panel import ReturnPanel, TStatSample, compute_tstats, panel_summary
from ..version import __version__
from . import schemas as sc

app = FastAPI(
    title="fdrbounds",
    version=__version__,
    description="FDR bounds, hurdle control, and simulation harnesses for "
    "cross-sectional return predictability.",
)


@app.exception_handler(DataError)
async def _data_error(request: Request, exc: DataError):
    return JSONResponse(status_code=400, content={"error": type(exc).__name__, "detail": str(exc)})


@app.exception_handler(InfeasibleError)
async def _infeasible(request: Request, exc: InfeasibleError):
    return JSONResponse(status_code=409, content={"error": type(exc).__name__, "detail": str(exc)})


@app.exception_handler(ValueError)
async def _value_error(request: Request, exc: ValueError):
    return JSONResponse(status_code=422, content={"error": "ValueError", "detail": str(exc)})


def _sample(abs_t: list[float]) -> TStatSample:
    values = np.asarray(abs_t, dtype=float)
    return TStatSample(values, np.zeros(values.size, dtype=int), "api")


def _report_out(report: bnd.FdrBoundReport) -> sc.BoundReportOut:
    return sc.BoundReportOut(
        method=report.method,
        hurdle=report.hurdle,
        bound_raw=report.bound_raw,
        bound_capped=report.bound_capped,
        sample_size=report.sample_size,
        intermediates=report.intermediates,
    )


def _pf_out(pf: bnd.PfBound) -> sc.PfBoundOut:
    return sc.PfBoundOut(
        value=pf.value,
        raw=pf.raw,
        share=pf.share,
        null_mass=pf.null_mass,
        cap_applied=pf.cap_applied,
        count=pf.count,
        sample_size=pf.sample_size,
    )


@app.get("/health", response_model=sc.HealthResponse)
def health() -> sc.HealthResponse:
    return sc.HealthResponse(status="ok", version=__version__)


@app.post("/v1/bounds/easy", response_model=sc.BoundReportOut)
def easy_bound(req: sc.EasyBoundRequest) -> sc.BoundReportOut:
    return _report_out(bnd.easy_bound(req.share_above, req.hurdle, null_model(req.null)))


@app.post("/v1/bounds/easy-from-tstats", response_model=sc.BoundReportOut)
def easy_bound_from_tstats(req: sc.EasyBoundFromTstatsRequest) -> sc.BoundReportOut:
    return _report_out(
        bnd.easy_bound_from_tstats(_sample(req.abs_t), req.hurdle, null_model(req.null))
    )


@app.post("/v1/bounds/storey", response_model=sc.BoundReportOut)
def storey_bound(req: sc.StoreyBoundRequest) -> sc.BoundReportOut:
    return _report_out(
        bnd.storey_fdr_bound(
            _sample(req.abs_t),
            req.hurdle,
            bnd.StoreyBinSpec(req.bin_lo, req.bin_hi),
            null_model(req.null),
        )
    )


@app.post("/v1/bounds/extrapolation", response_model=sc.BoundReportOut)
def extrapolation_bound(req: sc.ExtrapolationRequest) -> sc.BoundReportOut:
    return _report_out(bnd.exp_extrap_bound(req.mean_pub_t, req.hurdle, null_model(req.null)))


@app.post("/v1/bounds/interval", response_model=sc.PfBoundOut)
def interval_bound(req: sc.IntervalPfRequest) -> sc.PfBoundOut:
    return _pf_out(
        bnd.interval_pf_bound(req.share_in_interval, (req.lo, req.hi), null_model(req.null))
    )


@app.post("/v1/bounds/plugin-table", response_model=list[sc.PluginRowOut])
def plugin_table(req: sc.PluginTableRequest) -> list[sc.PluginRowOut]:
    entries = bnd.plugin_table(
        [(r.label, r.kind, r.value) for r in req.rows], req.hurdle, null_model(req.null)
    )
    return [
        sc.PluginRowOut(
            label=e.label,
            kind=e.kind,
            value=e.value,
            bound=_report_out(e.report) if e.report else None,
            error=e.error,
        )
        for e in entries
    ]


@app.post("/v1/bounds/decomposition", response_model=sc.DecompositionOut)
def decomposition(req: sc.DecompositionRequest) -> sc.DecompositionOut:
    d = bnd.histogram_decomposition(
        _sample(req.abs_t),
        null_model(req.null),
        scaling=req.scaling,
        bin_width=req.bin_width,
        hurdle=req.hurdle,
    )
    return sc.DecompositionOut(
        bins=[
            sc.DecompositionBinOut(
                lo=b.lo,
                hi=b.hi,
                count_empirical=b.count_empirical,
                count_null_scaled=b.count_null_scaled,
                count_true_implied=b.count_true_implied,
                false_share=b.false_share,
            )
            for b in d.bins
        ],
        scaling=d.scaling,
        pf=d.pf,
        null_scale=d.null_scale,
        null_tail_beyond=d.null_tail_beyond,
        sample_size=d.sample_size,
        hurdle=d.hurdle,
        count_above=d.count_above,
        share_above=d.share_above,
        null_above_scaled=d.null_above_scaled,
        fdr_bound_raw=d.fdr_bound_raw,
        fdr_bound_capped=d.fdr_bound_capped,
    )


@app.post("/v1/summary", response_model=list[sc.SummaryRowOut])
def summary(req: sc.SummaryRequest) -> list[sc.SummaryRowOut]:
    rows = panel_summary(_sample(req.abs_t), hurdles=req.hurdles, bins=req.bins)
    return [
        sc.SummaryRowOut(
            stat=r.stat, threshold_or_bin=r.threshold_or_bin, count=r.count, share=r.share
        )
        for r in rows
    ]


@app.post("/v1/control/hurdle", response_model=sc.HurdleOut)
def control_hurdle(req: sc.HurdleRequest) -> sc.HurdleOut:
    request = ctl.ControlRequest(q_star=req.q_star, method=req.method, null=null_model(req.null))
    sample = _sample(req.abs_t)
    result = ctl.bh95_hurdle(sample, request) if req.method == "bh95" else ctl.by13_hurdle(sample, request)
    return sc.HurdleOut(
        feasible=result.feasible,
        hurdle=result.hurdle,
        n_discoveries=len(result.discoveries),
        discoveries=list(result.discoveries),
        fdr_bound_at_hurdle=result.fdr_bound_at_hurdle,
        penalty=result.penalty,
        n_tests=result.n_tests,
    )


@app.post("/v1/control/bonferroni", response_model=sc.BonferroniOut)
def bonferroni(req: sc.BonferroniRequest) -> sc.BonferroniOut:
    return sc.BonferroniOut(
        hurdle=ctl.bonferroni_hurdle(req.m_tests, req.level, null_model(req.null))
    )


@app.post("/v1/tstats", response_model=sc.TstatsResponse)
def tstats(req: sc.TstatsRequest) -> sc.TstatsResponse:
    ids: list[str] = []
    months = sorted({r.month for r in req.rows})
    col = {m: j for j, m in enumerate(months)}
    seen: dict[tuple[str, str], bool] = {}
    for r in req.rows:
        key = (r.predictor_id, r.month)
        if key in seen:
            raise DataError(f"duplicate (predictor, month) pair: {key}")
        seen[key] = True
        if r.predictor_id not in ids:
            ids.append(r.predictor_id)
    returns = np.zeros((len(ids), len(months)))
    observed = np.zeros_like(returns, dtype=bool)
    row_of = {pid: i for i, pid in enumerate(ids)}
    for r in req.rows:
        if r.ret is not None:
            returns[row_of[r.predictor_id], col[r.month]] = r.ret
            observed[row_of[r.predictor_id], col[r.month]] = True
    panel = ReturnPanel(ids, returns, observed, months)
    result = compute_tstats(panel, min_obs=req.min_obs)
    return sc.TstatsResponse(
        predictors=[
            sc.PredictorTstatOut(predictor_id=pid, abs_t=float(t), n_obs=int(n))
            for pid, t, n in zip(
                result.sample.predictor_ids, result.sample.abs_t, result.sample.n_obs_used
            )
        ],
        excluded=[
            sc.ExclusionOut(predictor_id=e.predictor_id, reason=e.reason, n_obs=e.n_obs)
            for e in result.excluded
        ],
    )


@app.post("/v1/simulate", response_model=sc.GridCellOut)
def simulate(req: sc.SimulateRequest) -> sc.GridCellOut:
    config = sim.SimConfig(
        n_predictors=req.n_predictors,
        n_months=req.n_months,
        gamma_bps=req.gamma_bps,
        p_false=req.p_false,
        residual_source=sim.SyntheticSource(
            block_size=req.residual_source.block_size,
            within_block_corr=req.residual_source.within_block_corr,
            idio_sd=req.residual_source.idio_sd,
        ),
        seed=req.seed,
        n_sims=req.n_sims,
    )
    selection = sim.SelectionRule(s_bar=req.s_bar) if req.selection else None
    report = sim.monte_carlo_fdr(
        config,
        hurdle=req.hurdle,
        bin_spec=bnd.StoreyBinSpec(req.bin_lo, req.bin_hi),
        null=null_model(req.null),
        selection=selection,
        min_obs=req.min_obs,
    )
    return sc.GridCellOut(**report.__dict__)


@app.post("/v1/hlz/curve", response_model=list[sc.HlzCurvePointOut])
def hlz_curve(req: sc.HlzCurveRequest) -> list[sc.HlzCurvePointOut]:
    params = hlzmod.HlzParams(
        p0=req.p0,
        lambda_bps=req.lambda_bps,
        se_bps=req.se_bps if req.se_bps is not None else hlzmod.hlz_default_se(),
        rho=req.rho,
        n_factors=req.n_factors,
        s_bar=req.s_bar,
    )
    points = hlzmod.hlz_fdr_curve(
        params, req.hurdles, req.n_sims, seed=req.seed, published_only=req.published_only
    )
    return [sc.HlzCurvePointOut(**p.__dict__) for p in points]


@app.post("/v1/hlz/share-above", response_model=sc.HlzShareOut)
def hlz_share(req: sc.HlzShareRequest) -> sc.HlzShareOut:
    params = hlzmod.HlzParams(
        p0=req.p0,
        lambda_bps=req.lambda_bps,
        se_bps=req.se_bps if req.se_bps is not None else hlzmod.hlz_default_se(),
        rho=req.rho,
        n_factors=req.n_factors,
        s_bar=req.s_bar,
    )
    share = hlzmod.hlz_share_above(params, req.lower, req.upper, req.n_sims, seed=req.seed)
    fdr_at_upper = hlzmod.RECONCILIATION_FDR.get(req.upper)
    ceiling = (
        hlzmod.implied_fdr_ceiling(share, fdr_at_upper) if fdr_at_upper is not None else None
    )
    return sc.HlzShareOut(
        share_above_upper=share, implied_fdr_ceiling=ceiling, fdr_at_upper=fdr_at_upper
    )
