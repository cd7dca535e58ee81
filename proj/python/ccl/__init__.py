"""Cyclical curriculum learning toolkit.

Thin wrapper over the compiled core: dataset-size schedules, loss-based
weighted sampling without replacement, the MLP training loop with the
vanilla/cyclical/fixed-rank method family, and the selection-error analysis
(analytic formulas, Monte-Carlo checks, region grid).
"""

from ._core import (  # noqa: F401
    ComparisonReport,
    Dataset,
    EvalPoint,
    MethodStats,
    ModelState,
    RunResult,
    TrainConfig,
    __version__,
    accuracy,
    analytic_error,
    constant_sizes,
    cyclical_error_simulation,
    cyclical_sizes,
    erfc,
    extract_scores,
    forward,
    gen_blobs,
    gen_two_spirals,
    inclusion_probabilities_bruteforce,
    init_mlp,
    load_csv,
    load_idx,
    load_model,
    load_scores_csv,
    loss_distribution_diagnostics,
    losses_to_scores,
    mc_error,
    monotonic_sizes,
    per_sample_losses,
    region_grid,
    run_experiment,
    sample_without_replacement,
    save_model,
    save_scores_csv,
    split_dataset,
    subset_size,
    theorem4_bound_check,
    train_ccl,
    train_scoring_model,
    train_vanilla,
    ttest_two_sample,
)
