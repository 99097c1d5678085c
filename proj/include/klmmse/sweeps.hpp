#pragma once

#include <string>
#include <vector>

#include "klmmse/gaussian.hpp"
#include "klmmse/saddle.hpp"

namespace klmmse {

/// Four estimator/prior MSE combinations per grid point: the nominal Bayes
/// estimator f0 and the minimax-robust estimator f*, each under the nominal
/// prior and under its own least favorable prior.
struct RobustnessRow {
  double x;  // snr_db or epsilon depending on the sweep
  double mse_f0_nominal;
  double mse_f0_lfd;
  double mse_fstar_nominal;
  double mse_fstar_lfd;
};

struct GgRow {
  double p;
  double crb;
  double kl_lower;
  double kl_upper;
  double d_kl;
};

/// Noise level realizing a target SNR for the given signal covariance:
/// white noise with variance tr(S0) / (K * 10^(snr_db/10)).
double noise_variance_for_snr(const SpdMatrix& sigma_0, double snr_db);

std::vector<RobustnessRow> sweep_snr(const GaussianDist& nominal, double epsilon,
                                     const std::vector<double>& snr_db_grid,
                                     const SolverConfig& cfg = {}, int threads = 1);

std::vector<RobustnessRow> sweep_eps(const GaussianDist& nominal, double snr_db,
                                     const std::vector<double>& eps_grid,
                                     const SolverConfig& cfg = {}, int threads = 1);

std::vector<GgRow> sweep_gg(double snr_db, double power, const std::vector<double>& p_grid,
                            int threads = 1);

std::vector<double> grid_from_step(double start, double stop, double step);
std::vector<double> grid_log_spaced(double start, double stop, int points);

/// CSV with '.' decimals, ',' separators, a header row, LF line endings and
/// 17 significant digits.
std::string robustness_csv(const std::vector<RobustnessRow>& rows, const std::string& x_name);
std::string gg_csv(const std::vector<GgRow>& rows);

}  // namespace klmmse
