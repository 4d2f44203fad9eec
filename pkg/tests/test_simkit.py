import math

import numpy as np
import pytest

from fdrbounds.bounds import StoreyBinSpec
from fdrbounds.errors import DataError, DimensionMismatchError
from fdrbounds.nulls import EXACT_NORMAL, PAPER
from fdrbounds.panel import ReturnPanel, TStatSample
from fdrbounds.simkit import (
    ClusterBootstrapSource,
    MixedBootstrapSource,
    SelectionRule,
    SimConfig,
    SyntheticSource,
    TruthLabels,
    apply_selection,
    assemble_panel,
    cluster_bootstrap_residuals,
    demean_source,
    make_truth_and_mu,
    mixed_bootstrap_residuals,
    monte_carlo_fdr,
    realized_fdp,
    replication_rng,
    run_replications,
    simulate_grid,
    synthetic_source_panel,
)


def make_panel(returns, observed=None, ids=None):
    returns = np.asarray(returns, dtype=float)
    if observed is None:
        observed = np.ones_like(returns, dtype=bool)
    n, t = returns.shape
    ids = ids or [f"p{i}" for i in range(n)]
    return ReturnPanel(ids, returns, observed, [f"m{j:04d}" for j in range(t)])


def synth_config(**kw):
    defaults = dict(
        n_predictors=200,
        n_months=120,
        gamma_bps=50.0,
        p_false=0.5,
        residual_source=SyntheticSource(block_size=5, within_block_corr=0.2, idio_sd=3.0),
        seed=7,
        n_sims=4,
    )
    defaults.update(kw)
    return SimConfig(**defaults)


# ------------------------------------------------------------------- truth


def test_truth_boundaries():
    rng = replication_rng(1, 0)
    config = synth_config(p_false=0.0, gamma_bps=40.0)
    labels, mu = make_truth_and_mu(config, rng)
    assert not labels.is_false.any()
    assert np.all(mu == 0.40)  # bps converted to percent
    config = synth_config(p_false=1.0)
    labels, mu = make_truth_and_mu(config, replication_rng(1, 1))
    assert labels.is_false.all()
    assert np.all(mu == 0.0)


def test_truth_law_of_large_numbers():
    config = synth_config(n_predictors=100_000, p_false=0.5)
    labels, _ = make_truth_and_mu(config, replication_rng(2, 0))
    assert labels.is_false.mean() == pytest.approx(0.5, abs=0.01)


# --------------------------------------------------------------- bootstrap


def test_cluster_bootstrap_single_month_source_is_degenerate():
    source = make_panel(np.array([[1.3], [-0.7]]))
    out = cluster_bootstrap_residuals(source, 2, 10, replication_rng(3, 0))
    assert np.all(out.returns == 0.0)
    assert out.observed.all()


def test_cluster_bootstrap_preserves_perfect_correlation():
    rng = np.random.default_rng(11)
    base = rng.standard_normal(200)
    source = make_panel(np.vstack([base, 2.0 * base + 1.0]))
    out = cluster_bootstrap_residuals(source, 2, 200, replication_rng(3, 1))
    corr = np.corrcoef(out.returns)[0, 1]
    assert corr == pytest.approx(1.0, abs=1e-12)


def test_cluster_bootstrap_months_drawn_together():
    rng = np.random.default_rng(13)
    source = make_panel(rng.standard_normal((4, 50)))
    prep = demean_source(source)
    draw_rng = replication_rng(4, 0)
    out = cluster_bootstrap_residuals(prep, 4, 30, draw_rng)
    # replay the documented draw order with an identical stream
    replay = replication_rng(4, 0)
    month_idx = replay.integers(0, 50, size=30)
    assert np.array_equal(out.returns, prep.values[:, month_idx])


def test_cluster_bootstrap_propagates_missing_cells():
    rng = np.random.default_rng(17)
    returns = rng.standard_normal((3, 40))
    observed = np.ones((3, 40), bool)
    observed[1, ::2] = False
    source = make_panel(returns, observed)
    out = cluster_bootstrap_residuals(source, 3, 500, replication_rng(5, 0))
    assert not out.observed[1].all()
    assert out.observed[0].all()


def test_cluster_bootstrap_rejects_oversized_request():
    source = make_panel(np.random.default_rng(0).standard_normal((3, 20)))
    with pytest.raises(DataError):
        cluster_bootstrap_residuals(source, 4, 10, replication_rng(6, 0))


def test_demean_source_excludes_zero_history_predictors():
    returns = np.zeros((2, 5))
    observed = np.ones((2, 5), bool)
    observed[1] = False
    prep = demean_source(make_panel(returns, observed))
    assert prep.excluded_ids == ["p1"]
    assert prep.predictor_ids == ["p0"]
    with pytest.raises(DataError):
        demean_source(make_panel(np.zeros((1, 3)), np.zeros((1, 3), bool)))


def test_mixed_bootstrap_reduces_to_cluster_at_full_weight():
    rng = np.random.default_rng(19)
    source = make_panel(rng.standard_normal((6, 80)))
    prep = demean_source(source)
    out = mixed_bootstrap_residuals(prep, 10, 40, boot_weight=1.0, noise_sd=3.32,
                                    rng=replication_rng(7, 0))
    replay = replication_rng(7, 0)
    pred_idx = replay.integers(0, 6, size=10)
    month_idx = replay.integers(0, 80, size=40)
    assert np.array_equal(out.returns, prep.values[pred_idx][:, month_idx])


def test_mixed_bootstrap_pure_noise_is_uncorrelated():
    # sampling noise alone puts mean |corr| near sqrt(2/(pi*T)) = 0.036 at
    # T=500, so that is the yardstick for "uncorrelated"
    source = make_panel(np.random.default_rng(23).standard_normal((10, 60)))
    out = mixed_bootstrap_residuals(source, 40, 500, boot_weight=0.0, noise_sd=3.32,
                                    rng=replication_rng(8, 0))
    assert out.observed.all()
    corr = np.corrcoef(out.returns)
    off = corr[np.triu_indices(40, k=1)]
    assert abs(np.mean(off)) < 0.01
    assert np.mean(np.abs(off)) < 0.05
    assert out.returns.std() == pytest.approx(3.32, rel=0.05)


def test_mixed_bootstrap_can_exceed_source_cross_section():
    source = make_panel(np.random.default_rng(29).standard_normal((5, 60)))
    out = mixed_bootstrap_residuals(source, 50, 60, rng=replication_rng(9, 0))
    assert out.n_predictors == 50


def test_mixed_bootstrap_validation():
    source = make_panel(np.random.default_rng(31).standard_normal((5, 60)))
    with pytest.raises(ValueError):
        mixed_bootstrap_residuals(source, 5, 60, boot_weight=1.2, rng=replication_rng(10, 0))


# --------------------------------------------------------------- synthetic


def test_synthetic_independent_when_corr_zero():
    # at T=2000 the iid sampling floor sqrt(2/(pi*T)) = 0.018 sits under 0.02
    panel = synthetic_source_panel(30, 2000, block_size=5, within_block_corr=0.0,
                                   idio_sd=2.0, rng=replication_rng(11, 0))
    corr = np.corrcoef(panel.returns)
    off = corr[np.triu_indices(30, k=1)]
    assert np.mean(np.abs(off)) < 0.02
    assert abs(np.mean(off)) < 0.01


def test_synthetic_within_block_correlation():
    panel = synthetic_source_panel(200, 2000, block_size=2, within_block_corr=0.9,
                                   idio_sd=1.0, rng=replication_rng(12, 0))
    pair_corrs = [
        np.corrcoef(panel.returns[2 * b], panel.returns[2 * b + 1])[0, 1]
        for b in range(100)
    ]
    assert np.mean(pair_corrs) == pytest.approx(0.9, abs=0.03)


def test_synthetic_marginal_sd():
    panel = synthetic_source_panel(40, 5000, block_size=8, within_block_corr=0.35,
                                   idio_sd=3.32, rng=replication_rng(13, 0))
    sds = panel.returns.std(axis=1, ddof=1)
    assert np.mean(sds) == pytest.approx(3.32, rel=0.02)


# ---------------------------------------------------------------- assembly


def test_assemble_identity_and_mismatch():
    residuals = make_panel(np.random.default_rng(37).standard_normal((4, 30)))
    out = assemble_panel(np.zeros(4), residuals)
    assert np.array_equal(out.returns, residuals.returns)
    with pytest.raises(DimensionMismatchError):
        assemble_panel(np.zeros(5), residuals)


def test_assemble_power_oracle():
    # gamma=50 bps on iid residuals with sd 3.32 over 500 months:
    # mean true-predictor t-stat should be near 0.50/3.32*sqrt(500) = 3.3676
    rng = replication_rng(14, 0)
    residuals = synthetic_source_panel(4000, 500, block_size=1, within_block_corr=0.0,
                                       idio_sd=3.32, rng=rng)
    panel = assemble_panel(np.full(4000, 0.50), residuals)
    from fdrbounds.panel import masked_tstats

    t, _ = masked_tstats(panel.returns, panel.observed, min_obs=60)
    assert np.nanmean(t) == pytest.approx(3.3676, abs=0.05)


# --------------------------------------------------------------- selection


def sample_of(values):
    values = np.asarray(values, dtype=float)
    return TStatSample(values, np.zeros(values.size, dtype=int), "test")


def test_selection_rule_defaults_and_validation():
    rule = SelectionRule()
    assert rule.probabilities == (0.0, 0.5, 1.0)
    half = SelectionRule(s_bar=0.5)
    assert half.probabilities == (0.0, 0.25, 0.5)
    with pytest.raises(ValueError):
        SelectionRule(probabilities=(0.5, 0.2, 0.1))
    with pytest.raises(ValueError):
        SelectionRule(s_bar=0.0)


def test_selection_segments():
    rule = SelectionRule()
    rng = replication_rng(15, 0)
    assert apply_selection(sample_of([0.5, 1.0, 1.95, 1.96]), rule, rng).size == 0
    everything = apply_selection(sample_of([2.58, 3.0, 10.0]), rule, rng)
    assert np.array_equal(everything, [0, 1, 2])


def test_selection_middle_segment_lln():
    rng = replication_rng(16, 0)
    values = rng.uniform(1.9600001, 2.57, size=100_000)
    selected = apply_selection(sample_of(values), SelectionRule(), replication_rng(16, 1))
    assert selected.size / 100_000 == pytest.approx(0.5, abs=0.01)


# --------------------------------------------------------------------- fdp


def test_fdp_reference_ratios():
    labels = TruthLabels(np.array([True] * 2 + [False] * 208))
    values = np.full(210, 3.0)
    out = realized_fdp(labels, sample_of(values), 2.0)
    assert out.n_discoveries == 210 and out.n_false_discoveries == 2
    assert out.fdp == pytest.approx(2 / 210)
    labels = TruthLabels(np.array([True] * 13 + [False] * 292))
    out = realized_fdp(labels, sample_of(np.full(305, 2.5)), 2.0)
    assert out.fdp == pytest.approx(13 / 305)


def test_fdp_zero_discoveries_is_zero_not_error():
    labels = TruthLabels(np.array([True, False]))
    out = realized_fdp(labels, sample_of([0.5, 1.0]), 2.0)
    assert out.fdp == 0.0 and out.n_discoveries == 0


def test_fdp_alignment_checked():
    with pytest.raises(DimensionMismatchError):
        realized_fdp(TruthLabels(np.array([True])), sample_of([1.0, 2.0]), 2.0)


def test_fdp_matches_brute_force_recount():
    config = synth_config(n_predictors=200, n_sims=6)
    for rep in range(config.n_sims):
        rng = replication_rng(config.seed, rep)
        labels, mu = make_truth_and_mu(config, rng)
        residuals = synthetic_source_panel(
            200, config.n_months, 5, 0.2, 3.0, rng=rng
        )
        panel = assemble_panel(mu, residuals)
        from fdrbounds.panel import compute_tstats

        result = compute_tstats(panel, min_obs=60)
        assert not result.excluded
        got = realized_fdp(labels, result.sample, 2.0)
        false_count = total = 0
        for i in range(200):
            if result.sample.abs_t[i] > 2.0:
                total += 1
                if labels.is_false[i]:
                    false_count += 1
        assert (got.n_discoveries, got.n_false_discoveries) == (total, false_count)
        assert got.fdp == (false_count / total if total else 0.0)


# ------------------------------------------------------------- monte carlo


def test_monte_carlo_no_false_predictors():
    report = monte_carlo_fdr(synth_config(p_false=0.0, n_sims=5), null=PAPER)
    assert report.actual_fdr == 0.0
    assert report.mean_easy_bound >= 0.0
    assert report.cover_rate_easy == 1.0


def test_monte_carlo_all_null_calibration():
    config = synth_config(n_predictors=2000, n_months=400, p_false=1.0, n_sims=8)
    report = monte_carlo_fdr(config, hurdle=2.0, null=PAPER)
    # every discovery is false, and a large null panel always produces some
    assert report.actual_fdr == 1.0
    assert report.mean_easy_bound == pytest.approx(1.0, abs=0.08)
    assert report.n_undefined == 0


def test_monte_carlo_determinism_across_threads():
    config = synth_config(n_sims=12)
    serial = monte_carlo_fdr(config, null=PAPER, threads=1)
    threaded = monte_carlo_fdr(config, null=PAPER, threads=8)
    assert serial == threaded


def test_monte_carlo_storey_below_easy_per_replication():
    outcomes = run_replications(synth_config(n_sims=10), null=PAPER)
    seen = 0
    for o in outcomes:
        if o.easy_bound is not None and o.storey_bound is not None:
            assert o.storey_bound <= o.easy_bound + 1e-12
            seen += 1
    assert seen > 0


def test_monte_carlo_selection_produces_extrap_bound():
    config = synth_config(n_predictors=1500, n_months=200, gamma_bps=50, p_false=0.4, n_sims=6)
    report = monte_carlo_fdr(config, null=PAPER, selection=SelectionRule())
    assert report.mean_extrap_bound is not None
    assert 0.0 < report.mean_extrap_bound <= 1.0
    no_sel = monte_carlo_fdr(config, null=PAPER)
    assert no_sel.mean_extrap_bound is None


def test_monte_carlo_undefined_replications_are_counted():
    # tiny all-null panels frequently have no |t| > 4.5 at all
    config = synth_config(n_predictors=30, n_months=120, p_false=1.0, n_sims=20)
    report = monte_carlo_fdr(config, hurdle=4.5, null=EXACT_NORMAL)
    assert report.n_undefined > 0
    assert report.n_undefined_easy == report.n_undefined


def test_simulate_grid_shape_and_order():
    base = synth_config(n_sims=2)
    reports = simulate_grid(base, [25, 75], [0.1, 0.9], null=PAPER)
    assert [(r.gamma_bps, r.p_false) for r in reports] == [
        (25.0, 0.1),
        (25.0, 0.9),
        (75.0, 0.1),
        (75.0, 0.9),
    ]


def test_sim_config_validation():
    with pytest.raises(ValueError):
        synth_config(p_false=1.5)
    with pytest.raises(ValueError):
        synth_config(n_sims=0)
    with pytest.raises(ValueError):
        SyntheticSource(within_block_corr=1.0)
    with pytest.raises(ValueError):
        MixedBootstrapSource(make_panel(np.zeros((1, 2))), boot_weight=-0.1)


def test_bootstrap_sources_in_monte_carlo():
    rng = np.random.default_rng(61)
    source = make_panel(rng.standard_normal((100, 150)) * 3.0)
    for residual_source in (
        ClusterBootstrapSource(source),
        MixedBootstrapSource(source, boot_weight=0.65, noise_sd=3.0),
    ):
        config = synth_config(
            n_predictors=100, n_months=150, residual_source=residual_source, n_sims=3
        )
        report = monte_carlo_fdr(config, null=PAPER)
        assert 0.0 <= report.actual_fdr <= 1.0
