"""Command-line surface: thin dispatch over the library.

Each subcommand writes plot-ready CSV plus a sidecar JSON manifest into the
--out directory. Exit codes: 0 success, 2 usage error, 3 data error, 4
infeasible computation (e.g. no discoveries above the hurdle).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import bounds as bnd
from . import control as ctl
from . import hlz as hlzmod
from . import simkit as sim
from .errors import DataError, InfeasibleError
from .manifest import RunManifest
from .nulls import null_model
from .panel import (
    DEFAULT_MIN_OBS,
    TStatSample,
    compute_alpha_tstats,
    compute_tstats,
    load_factor_csv,
    load_panel_csv,
    panel_summary,
)
from .version import __version__


class UsageError(Exception):
    """Bad flag combination; maps to exit code 2."""


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_outputs(args, name: str, header, rows, config: dict, seed: int = 0) -> Path:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{name}.csv"
    _write_csv(csv_path, header, rows)
    manifest = RunManifest.create(args.subcommand, config, seed)
    manifest.write(out_dir / f"{name}.manifest.json")
    print(f"wrote {csv_path}")
    return csv_path


def _parse_pair(text: str, flag: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"{flag} expects lo,hi")
    return float(parts[0]), float(parts[1])


def _parse_floats(text: str) -> list[float]:
    return [float(p) for p in text.split(",") if p.strip()]


def _read_tstat_csv(path) -> TStatSample:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise DataError(f"{path}: no t-stat rows")
    header = rows[0]
    if len(header) < 2:
        raise DataError(f"{path}: expected predictor_id,<abs t>[,n_obs]")
    ids, values, n_obs = [], [], []
    for row in rows[1:]:
        if not row or all(not c.strip() for c in row):
            continue
        ids.append(row[0])
        values.append(float(row[1]))
        n_obs.append(int(row[2]) if len(row) > 2 and row[2].strip() else 0)
    return TStatSample(np.asarray(values), np.asarray(n_obs), f"file:{path}", ids)


# ---------------------------------------------------------------- tstats


def cmd_tstats(args) -> int:
    panel, report = load_panel_csv(args.panel, wide=args.wide, delimiter=args.delimiter)
    if args.factors:
        factors = load_factor_csv(args.factors)
        model = [m for m in (args.model or "").split(",") if m]
        if not model:
            raise UsageError("--factors requires --model naming factor columns")
        result = compute_alpha_tstats(panel, factors, model, min_obs=args.min_obs)
        label = "+".join(model)
    else:
        if args.model:
            raise UsageError("--model requires --factors")
        result = compute_tstats(panel, min_obs=args.min_obs)
        label = "abs_t"
    for exc in result.excluded:
        print(f"excluded {exc.predictor_id}: {exc.reason} (n_obs={exc.n_obs})", file=sys.stderr)
    if report.n_missing_cells:
        print(f"missing cells treated as unobserved: {report.n_missing_cells}", file=sys.stderr)
    sample = result.sample
    rows = [
        (pid, t, n)
        for pid, t, n in zip(sample.predictor_ids, sample.abs_t, sample.n_obs_used)
    ]
    config = {
        "panel": str(args.panel),
        "wide": args.wide,
        "factors": str(args.factors) if args.factors else None,
        "model": args.model,
        "min_obs": args.min_obs,
    }
    _write_outputs(args, "tstats", ["predictor_id", label, "n_obs"], rows, config)
    return 0


# --------------------------------------------------------------- summary


def cmd_summary(args) -> int:
    sample = _read_tstat_csv(args.tstat_csv)
    hurdles = _parse_floats(args.hurdles) if args.hurdles else []
    bins = []
    if args.bins:
        for piece in args.bins.split(";"):
            if piece.strip():
                bins.append(_parse_pair(piece, "--bins"))
    rows = panel_summary(sample, hurdles=hurdles, bins=bins)
    config = {"tstat_csv": str(args.tstat_csv), "hurdles": args.hurdles, "bins": args.bins}
    _write_outputs(
        args,
        "summary",
        ["stat", "threshold_or_bin", "count", "share"],
        [(r.stat, r.threshold_or_bin, r.count, r.share) for r in rows],
        config,
    )
    return 0


# ---------------------------------------------------------------- bound


def cmd_bound(args) -> int:
    null = null_model(args.null)
    summary_flags = [
        args.share_above is not None,
        args.mean_pub_t is not None,
        args.share_in_bin is not None,
        args.share_in_interval is not None,
    ]
    if args.tstat_csv and any(summary_flags):
        raise UsageError("give either --tstat-csv or summary flags, not both")
    bin_spec = bnd.StoreyBinSpec(*_parse_pair(args.bin, "--bin"))

    if args.method == "easy":
        if args.tstat_csv:
            report = bnd.easy_bound_from_tstats(_read_tstat_csv(args.tstat_csv), args.hurdle, null)
        elif args.share_above is not None:
            report = bnd.easy_bound(args.share_above, args.hurdle, null)
        else:
            raise UsageError("easy bound needs --share-above or --tstat-csv")
    elif args.method == "storey":
        if args.tstat_csv:
            report = bnd.storey_fdr_bound(_read_tstat_csv(args.tstat_csv), args.hurdle, bin_spec, null)
        elif args.share_above is not None and args.share_in_bin is not None:
            report = bnd.storey_fdr_bound_from_shares(
                args.share_above, args.share_in_bin, args.hurdle, bin_spec, null
            )
        else:
            raise UsageError("storey bound needs --tstat-csv or --share-above with --share-in-bin")
    elif args.method == "extrap":
        if args.tstat_csv:
            sample = _read_tstat_csv(args.tstat_csv)
            above = sample.abs_t[sample.abs_t > args.hurdle]
            if above.size == 0:
                raise InfeasibleError(f"no |t| exceeds hurdle {args.hurdle}")
            report = bnd.exp_extrap_bound(float(above.mean()), args.hurdle, null)
        elif args.mean_pub_t is not None:
            report = bnd.exp_extrap_bound(args.mean_pub_t, args.hurdle, null)
        else:
            raise UsageError("extrap bound needs --mean-pub-t or --tstat-csv")
    elif args.method == "interval":
        if args.share_in_interval is None or args.interval is None:
            raise UsageError("interval bound needs --share-in-interval and --interval lo,hi")
        pf = bnd.interval_pf_bound(args.share_in_interval, _parse_pair(args.interval, "--interval"), null)
        report = bnd.FdrBoundReport(
            method="interval_pf",
            hurdle=args.hurdle,
            bound_raw=pf.raw,
            bound_capped=pf.value,
            intermediates={
                "share_in_interval": pf.share,
                "null_interval_mass": pf.null_mass,
                "cap_applied": pf.cap_applied,
                "implied_true_share": 1.0 - pf.value,
            },
        )
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown method {args.method}")

    flat = report.to_flat_dict()
    flat["null"] = args.null
    config = {
        "method": args.method,
        "hurdle": args.hurdle,
        "null": args.null,
        "tstat_csv": str(args.tstat_csv) if args.tstat_csv else None,
        "share_above": args.share_above,
        "mean_pub_t": args.mean_pub_t,
        "share_in_bin": args.share_in_bin,
        "share_in_interval": args.share_in_interval,
        "interval": args.interval,
        "bin": args.bin,
    }
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "bound.json", "w", encoding="utf-8") as fh:
        json.dump(flat, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    _write_outputs(args, "bound", list(flat.keys()), [list(flat.values())], config)
    return 0


# ---------------------------------------------------------------- decompose


def cmd_decompose(args) -> int:
    null = null_model(args.null)
    sample = _read_tstat_csv(args.tstat_csv)
    decomp = bnd.histogram_decomposition(
        sample, null, scaling=args.scaling, bin_width=args.bin_width, hurdle=args.hurdle
    )
    rows = [
        (b.lo, b.hi, b.count_empirical, b.count_null_scaled, b.count_true_implied, b.false_share)
        for b in decomp.bins
    ]
    config = {
        "tstat_csv": str(args.tstat_csv),
        "scaling": args.scaling,
        "bin_width": args.bin_width,
        "hurdle": args.hurdle,
        "null": args.null,
    }
    _write_outputs(
        args,
        "decomposition",
        ["bin_lo", "bin_hi", "count_empirical", "count_null_scaled", "count_true_implied", "false_share"],
        rows,
        config,
    )
    print(
        f"discovery region |t|>{decomp.hurdle}: share {decomp.share_above:.4f}, "
        f"fdr bound {decomp.fdr_bound_capped}"
    )
    return 0


# ---------------------------------------------------------------- control


def cmd_control(args) -> int:
    null = null_model(args.null)
    sample = _read_tstat_csv(args.tstat_csv)
    request = ctl.ControlRequest(q_star=args.q_star, method=args.method, null=null)
    result = ctl.bh95_hurdle(sample, request) if args.method == "bh95" else ctl.by13_hurdle(sample, request)
    hurdle = result.hurdle if result.feasible else "none-feasible"
    rows = [(args.method, args.q_star, result.penalty, hurdle, len(result.discoveries))]
    config = {
        "tstat_csv": str(args.tstat_csv),
        "method": args.method,
        "q_star": args.q_star,
        "null": args.null,
    }
    _write_outputs(
        args, "control", ["method", "q_star", "penalty", "hurdle", "n_discoveries"], rows, config
    )
    return 0


# ---------------------------------------------------------------- simulate


def _load_sim_config(args) -> tuple[sim.SimConfig, dict]:
    with open(args.config, encoding="utf-8") as fh:
        raw = json.load(fh)
    src = dict(raw.get("residual_source", {"kind": "synthetic"}))
    kind = src.pop("kind", "synthetic")
    if kind == "synthetic":
        source = sim.SyntheticSource(**src)
    elif kind in ("cluster_bootstrap", "mixed_bootstrap"):
        path = src.pop("source_csv", None)
        if not path:
            raise DataError("bootstrap residual_source needs source_csv")
        wide = src.pop("wide", False)
        panel, _ = load_panel_csv(path, wide=wide)
        if kind == "cluster_bootstrap":
            source = sim.ClusterBootstrapSource(panel, **src)
        else:
            source = sim.MixedBootstrapSource(panel, **src)
    else:
        raise DataError(f"unknown residual_source kind: {kind!r}")
    seed = args.seed if args.seed is not None else int(raw.get("seed", 0))
    n_sims = args.n_sims if args.n_sims is not None else int(raw.get("n_sims", 1))
    config = sim.SimConfig(
        n_predictors=int(raw["n_predictors"]),
        n_months=int(raw["n_months"]),
        gamma_bps=float(raw.get("gamma_bps", 0.0)),
        p_false=float(raw.get("p_false", 1.0)),
        residual_source=source,
        seed=seed,
        n_sims=n_sims,
    )
    resolved = dict(raw)
    resolved.update(
        {"seed": seed, "n_sims": n_sims, "residual_source": {"kind": kind, **src}}
    )
    return config, resolved


def cmd_simulate(args) -> int:
    base, resolved = _load_sim_config(args)
    null = null_model(args.null)
    bin_spec = bnd.StoreyBinSpec(*_parse_pair(args.bin, "--bin"))
    selection = None
    if args.selection == "staircase":
        selection = sim.SelectionRule(s_bar=args.s_bar)
    gammas = _parse_floats(args.gamma_grid) if args.gamma_grid else [base.gamma_bps]
    p_falses = _parse_floats(args.p_false_grid) if args.p_false_grid else [base.p_false]
    reports = sim.simulate_grid(
        base,
        gammas,
        p_falses,
        hurdle=args.hurdle,
        bin_spec=bin_spec,
        null=null,
        selection=selection,
        min_obs=args.min_obs,
        threads=args.threads,
    )
    rows = [
        (
            r.gamma_bps,
            r.p_false,
            r.hurdle,
            r.n_sims,
            r.actual_fdr,
            r.mean_easy_bound,
            r.mean_storey_bound,
            r.mean_extrap_bound,
            r.cover_rate_easy,
            r.cover_rate_storey,
            r.n_undefined,
        )
        for r in reports
    ]
    resolved.update(
        {
            "gamma_grid": gammas,
            "p_false_grid": p_falses,
            "hurdle": args.hurdle,
            "bin": args.bin,
            "null": args.null,
            "selection": args.selection,
            "s_bar": args.s_bar,
            "min_obs": args.min_obs,
        }
    )
    _write_outputs(
        args,
        "grid",
        [
            "gamma_bps",
            "p_false",
            "hurdle",
            "n_sims",
            "actual_fdr",
            "mean_easy_bound",
            "mean_storey_bound",
            "mean_extrap_bound",
            "cover_rate_easy",
            "cover_rate_storey",
            "n_undefined",
        ],
        rows,
        resolved,
        seed=base.seed,
    )
    return 0


# ---------------------------------------------------------------- hlz


def cmd_hlz(args) -> int:
    params = hlzmod.HlzParams(
        p0=args.p0,
        lambda_bps=args.lambda_bps,
        se_bps=args.se_bps if args.se_bps is not None else hlzmod.hlz_default_se(),
        rho=args.rho,
        n_factors=args.n_factors,
        s_bar=args.s_bar,
    )
    hurdles = _parse_floats(args.hurdles)
    points = hlzmod.hlz_fdr_curve(
        params, hurdles, args.n_sims, seed=args.seed, published_only=args.published_only
    )
    rows = [
        (p.hurdle, p.n_sims, p.mean_fdr, p.mean_discoveries, p.mean_false_discoveries)
        for p in points
    ]
    config = {
        "p0": params.p0,
        "lambda_bps": params.lambda_bps,
        "se_bps": params.se_bps,
        "rho": params.rho,
        "n_factors": params.n_factors,
        "s_bar": params.s_bar,
        "hurdles": hurdles,
        "n_sims": args.n_sims,
        "published_only": args.published_only,
    }
    _write_outputs(
        args,
        "hlz_curve",
        ["hurdle", "n_sims", "mean_fdr", "mean_discoveries", "mean_false_discoveries"],
        rows,
        config,
        seed=args.seed,
    )
    if args.scatter:
        draw = hlzmod.hlz_draw(params, sim.replication_rng(args.seed, 0))
        scatter_rows = [
            (i, draw.mu_bps[i], abs(draw.t[i]), bool(draw.is_false[i]), bool(draw.published[i]))
            for i in range(params.n_factors)
        ]
        _write_csv(
            Path(args.out) / "hlz_scatter.csv",
            ["factor_index", "mu_bps", "abs_t", "is_false", "published"],
            scatter_rows,
        )
        print(f"wrote {Path(args.out) / 'hlz_scatter.csv'}")
    return 0


# ---------------------------------------------------------------- parser


def _add_common(p, *, seed=None, threads=False) -> None:
    p.add_argument("--null", choices=["exact", "paper"], default="exact")
    p.add_argument("--out", default=".", help="output directory")
    if seed == "optional":
        p.add_argument("--seed", type=int, default=None, help="overrides the config file")
    elif seed == "default0":
        p.add_argument("--seed", type=int, default=0)
    if threads:
        p.add_argument("--threads", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdrbounds",
        description="FDR bounds, hurdle control, and simulation harnesses "
        "for cross-sectional return predictability",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="subcommand", required=True)

    p = subs.add_parser("tstats", help="t-stats from a panel CSV")
    p.add_argument("panel")
    p.add_argument("--wide", action="store_true", help="months-as-columns input")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--factors", default=None, help="factor CSV for alpha t-stats")
    p.add_argument("--model", default=None, help="comma-separated factor columns")
    p.add_argument("--min-obs", dest="min_obs", type=int, default=DEFAULT_MIN_OBS)
    _add_common(p)
    p.set_defaults(func=cmd_tstats)

    p = subs.add_parser("summary", help="hurdle and bin shares of a t-stat sample")
    p.add_argument("--tstat-csv", dest="tstat_csv", required=True)
    p.add_argument("--hurdles", default="2.0", help="comma-separated hurdles")
    p.add_argument("--bins", default="0,0.5", help="semicolon-separated lo,hi pairs")
    _add_common(p)
    p.set_defaults(func=cmd_summary)

    p = subs.add_parser("bound", help="one FDR bound from a sample or summary stats")
    p.add_argument("--method", choices=["easy", "storey", "extrap", "interval"], required=True)
    p.add_argument("--tstat-csv", dest="tstat_csv", default=None)
    p.add_argument("--share-above", dest="share_above", type=float, default=None)
    p.add_argument("--mean-pub-t", dest="mean_pub_t", type=float, default=None)
    p.add_argument("--share-in-bin", dest="share_in_bin", type=float, default=None)
    p.add_argument("--share-in-interval", dest="share_in_interval", type=float, default=None)
    p.add_argument("--interval", default=None, help="signed interval lo,hi")
    p.add_argument("--hurdle", type=float, default=2.0)
    p.add_argument("--bin", default="0,0.5", help="small-|t| bin lo,hi")
    _add_common(p)
    p.set_defaults(func=cmd_bound)

    p = subs.add_parser("decompose", help="histogram decomposition of a t-stat sample")
    p.add_argument("--tstat-csv", dest="tstat_csv", required=True)
    p.add_argument("--scaling", choices=["easy", "storey"], default="storey")
    p.add_argument("--bin-width", dest="bin_width", type=float, default=0.5)
    p.add_argument("--hurdle", type=float, default=2.0)
    _add_common(p)
    p.set_defaults(func=cmd_decompose)

    p = subs.add_parser("control", help="FDR-controlling hurdle selection")
    p.add_argument("--tstat-csv", dest="tstat_csv", required=True)
    p.add_argument("--method", choices=["bh95", "by13"], default="bh95")
    p.add_argument("--q-star", dest="q_star", type=float, required=True)
    _add_common(p)
    p.set_defaults(func=cmd_control)

    p = subs.add_parser("simulate", help="Monte Carlo bound validation grid")
    p.add_argument("--config", required=True, help="JSON file mirroring SimConfig")
    p.add_argument("--gamma-grid", dest="gamma_grid", default=None, help="bps values, comma-separated")
    p.add_argument("--p-false-grid", dest="p_false_grid", default=None)
    p.add_argument("--hurdle", type=float, default=2.0)
    p.add_argument("--bin", default="0,0.5")
    p.add_argument("--selection", choices=["none", "staircase"], default="none")
    p.add_argument("--s-bar", dest="s_bar", type=float, default=1.0)
    p.add_argument("--min-obs", dest="min_obs", type=int, default=DEFAULT_MIN_OBS)
    p.add_argument("--n-sims", dest="n_sims", type=int, default=None)
    _add_common(p, seed="optional", threads=True)
    p.set_defaults(func=cmd_simulate)

    p = subs.add_parser("hlz", help="FDR-at-hurdle curve for the parametric factor model")
    p.add_argument("--p0", type=float, default=0.444)
    p.add_argument("--lambda-bps", dest="lambda_bps", type=float, default=55.5)
    p.add_argument("--se-bps", dest="se_bps", type=float, default=None)
    p.add_argument("--rho", type=float, default=0.2)
    p.add_argument("--n-factors", dest="n_factors", type=int, default=1378)
    p.add_argument("--s-bar", dest="s_bar", type=float, default=1.0)
    p.add_argument("--hurdles", default="2.0,2.27,2.95")
    p.add_argument("--n-sims", dest="n_sims", type=int, default=200)
    p.add_argument("--published-only", dest="published_only", action="store_true")
    p.add_argument("--scatter", action="store_true", help="also export one draw for plotting")
    _add_common(p, seed="default0")
    p.set_defaults(func=cmd_hlz)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (DataError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
