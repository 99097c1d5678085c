"""MMSE bounds and minimax-robust estimation over KL uncertainty balls."""

from klmmse._core import (  # noqa: F401
    InfeasibleAlpha,
    McEstimate,
    NonConvergent,
    SaddleSolution,
    __version__,
    alt_optimality_residual,
    apply_estimator,
    bayesian_crb,
    channel_operators,
    gamma_fn,
    gg_density,
    gg_fisher_information,
    gg_from_power,
    gg_kl_mmse_bounds,
    gg_kl_to_gaussian,
    kl_gaussian,
    lambert_w,
    least_favorable_vs_nominal,
    mc_mse,
    mc_verify_bounds,
    mmse_bounds,
    mmse_estimator,
    mmse_gaussian,
    mse_linear_under_gaussian,
    reduce_observations,
    robust_estimator,
    sample_gaussian,
    sample_in_ball_gaussians,
    solve_saddle,
    toeplitz_exp_cov,
    white_bounds,
    white_variances,
)
