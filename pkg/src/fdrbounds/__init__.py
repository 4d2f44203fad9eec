"""FDR bounds for cross-sectional return predictability.

Library layout:

* panel: return/factor panels and t-stat computation
* nulls: the two-sided normal null (exact or published-rounding mode)
* bounds: easy, combined (Storey-style), extrapolation and interval bounds
* control: step-up hurdle selection and the Bonferroni hurdle
* simkit: bootstrap/synthetic simulation harness with ground-truth FDP
* hlz: the parametric factor-model reconciliation
* cli / service: command line and HTTP front ends over the same operations
"""

from .bounds import (
    DEFAULT_STOREY_BIN,
    FdrBoundReport,
    PfBound,
    StoreyBinSpec,
    easy_bound,
    easy_bound_from_tstats,
    exp_extrap_bound,
    extrapolation_bound_from_mean,
    histogram_decomposition,
    interval_pf_bound,
    plugin_table,
    storey_fdr_bound,
    storey_fdr_bound_from_shares,
    storey_pf_bound,
    storey_pf_bound_from_share,
)
from .control import (
    ControlRequest,
    HurdleResult,
    bh95_hurdle,
    bonferroni_hurdle,
    by13_hurdle,
    fdr_bound_at_hurdle,
    harmonic_number,
)
from .hlz import (
    FactorDraw,
    HlzParams,
    hlz_default_se,
    hlz_draw,
    hlz_fdr_curve,
    hlz_share_above,
    implied_fdr_ceiling,
)
from .nulls import EXACT_NORMAL, PAPER, NullModel, null_model
from .panel import (
    FactorPanel,
    ReturnPanel,
    TStatResult,
    TStatSample,
    compute_alpha_tstats,
    compute_tstats,
    load_factor_csv,
    load_panel_csv,
    panel_summary,
)
from .simkit import (
    ClusterBootstrapSource,
    FdpResult,
    GridCellReport,
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
    simulate_grid,
    synthetic_source_panel,
)
from .version import __version__

__all__ = [name for name in dir() if not name.startswith("_")]
