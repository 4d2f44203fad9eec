import math

import numpy as np
import pytest

from fdrbounds.hlz import (
    HlzParams,
    hlz_default_se,
    hlz_draw,
    hlz_fdr_curve,
    hlz_share_above,
    implied_fdr_ceiling,
)
from fdrbounds.simkit import replication_rng


def test_default_se_formula():
    assert hlz_default_se() == pytest.approx(27.9508497187, abs=0.01)
    # quadrupling the months halves the standard error
    assert hlz_default_se(n_months=960) == pytest.approx(hlz_default_se() / 2.0, rel=1e-12)


def test_mean_t_shift_of_true_factors():
    params = HlzParams()
    assert params.lambda_bps / params.se_bps == pytest.approx(1.98562836402, rel=1e-9)


def test_params_validation():
    with pytest.raises(ValueError):
        HlzParams(p0=1.2)
    with pytest.raises(ValueError):
        HlzParams(rho=1.0)
    with pytest.raises(ValueError):
        HlzParams(lambda_bps=0.0)
    with pytest.raises(ValueError):
        HlzParams(s_bar=0.0)


def test_labels_match_means_exactly_on_every_draw():
    params = HlzParams(n_factors=500)
    for rep in range(20):
        draw = hlz_draw(params, replication_rng(101, rep))
        assert np.array_equal(draw.is_false, draw.mu_bps == 0.0)


def test_independent_limit_has_unit_variance():
    params = HlzParams(rho=0.0, n_factors=10_000)
    draw = hlz_draw(params, replication_rng(103, 0))
    residual = draw.t - draw.mu_bps / params.se_bps
    assert residual.var(ddof=1) == pytest.approx(1.0, abs=0.05)


def test_all_null_published_share_matches_staircase_mass():
    params = HlzParams(p0=1.0, n_factors=2000)
    # |N(0,1)| staircase mass: full weight above 2.57, half weight between
    tail_196 = 0.04999579029644087
    tail_257 = 0.010177010891374737
    expected = tail_257 + 0.5 * (tail_196 - tail_257)
    shares = []
    for rep in range(100):
        draw = hlz_draw(params, replication_rng(107, rep))
        assert not (~draw.is_false).any()
        shares.append(draw.published.mean())
    assert np.mean(shares) == pytest.approx(expected, abs=0.003)


def test_pairwise_correlation_of_t_residuals():
    params = HlzParams(n_factors=50)
    n_reps = 1000
    residuals = np.empty((n_reps, params.n_factors))
    for rep in range(n_reps):
        draw = hlz_draw(params, replication_rng(109, rep))
        residuals[rep] = draw.t - draw.mu_bps / params.se_bps
    corr = np.corrcoef(residuals.T)
    off = corr[np.triu_indices(params.n_factors, k=1)]
    assert off.mean() == pytest.approx(0.2, abs=0.02)


def test_published_implies_above_lowest_threshold():
    params = HlzParams(n_factors=5000)
    draw = hlz_draw(params, replication_rng(113, 0))
    assert np.all(np.abs(draw.t[draw.published]) > 1.96)


def test_middle_segment_publishes_at_half_rate():
    params = HlzParams(n_factors=20_000)
    in_seg = pub_in_seg = 0
    for rep in range(30):
        draw = hlz_draw(params, replication_rng(127, rep))
        abs_t = np.abs(draw.t)
        seg = (abs_t > 1.96) & (abs_t <= 2.57)
        in_seg += int(seg.sum())
        pub_in_seg += int((seg & draw.published).sum())
    assert pub_in_seg / in_seg == pytest.approx(0.5, abs=0.02)


def test_fdr_curve_non_increasing_in_hurdle():
    points = hlz_fdr_curve(HlzParams(), np.arange(2.0, 4.01, 0.25), n_sims=500, seed=131)
    fdrs = [p.mean_fdr for p in points]
    for a, b in zip(fdrs, fdrs[1:]):
        assert b <= a + 0.005


def test_halving_s_bar_keeps_fdr_curve_and_halves_published_counts():
    hurdles = [2.0, 2.27, 2.95]
    full = hlz_fdr_curve(HlzParams(s_bar=1.0), hurdles, n_sims=200, seed=137)
    half = hlz_fdr_curve(HlzParams(s_bar=0.5), hurdles, n_sims=200, seed=137)
    # discovery logic ignores publication unless published_only is set, and
    # the publication draw happens after the t draw, so curves are identical
    for a, b in zip(full, half):
        assert a.mean_fdr == b.mean_fdr
    pub_full = pub_half = 0
    for rep in range(100):
        pub_full += hlz_draw(HlzParams(s_bar=1.0), replication_rng(139, rep)).published.sum()
        pub_half += hlz_draw(HlzParams(s_bar=0.5), replication_rng(139, rep)).published.sum()
    assert pub_half / pub_full == pytest.approx(0.5, abs=0.03)


def test_published_only_curve_differs_below_staircase_top():
    hurdles = [2.0, 2.95]
    unrestricted = hlz_fdr_curve(HlzParams(), hurdles, n_sims=100, seed=149)
    published = hlz_fdr_curve(HlzParams(), hurdles, n_sims=100, seed=149, published_only=True)
    assert published[0].mean_discoveries < unrestricted[0].mean_discoveries
    # above 2.57 the staircase keeps everything at s_bar = 1
    assert published[1].mean_discoveries == pytest.approx(
        unrestricted[1].mean_discoveries, rel=1e-12
    )


def test_curve_reference_levels_attached():
    points = hlz_fdr_curve(HlzParams(), [2.0, 2.27, 2.5, 2.95], n_sims=10, seed=151)
    refs = {p.hurdle: p.reference_fdr for p in points}
    assert refs[2.0] == 0.09 and refs[2.27] == 0.05 and refs[2.95] == 0.01
    assert refs[2.5] is None


def test_share_above_boundary_and_combiner():
    assert hlz_share_above(HlzParams(n_factors=100), 2.0, 2.0, n_sims=5, seed=157) == 1.0
    assert implied_fdr_ceiling(0.69, 0.05) == pytest.approx(0.3445)
    assert implied_fdr_ceiling(0.91, 0.05) == pytest.approx(0.1355)
    with pytest.raises(ValueError):
        implied_fdr_ceiling(1.2, 0.05)


def test_share_above_matches_reconciliation_scale():
    share = hlz_share_above(HlzParams(), 2.0, 2.27, n_sims=300, seed=163)
    assert share == pytest.approx(0.91, abs=0.03)


def test_curve_validation():
    with pytest.raises(ValueError):
        hlz_fdr_curve(HlzParams(), [], n_sims=10)
    with pytest.raises(ValueError):
        hlz_fdr_curve(HlzParams(), [2.0], n_sims=0)
    with pytest.raises(ValueError):
        hlz_share_above(HlzParams(), 2.5, 2.0, n_sims=10)
