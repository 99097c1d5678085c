#include "klmmse/sweeps.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "klmmse/gg.hpp"

namespace klmmse {

namespace {

// Runs fn(i) for i in [0, n) over `threads` workers; results must be written
// into preallocated slots so the output order never depends on scheduling.
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

RobustnessRow robustness_point(const GaussianDist& nominal, double epsilon, double x,
                               double noise_var, const SolverConfig& cfg) {
  const int k = nominal.dim();
  const SpdMatrix sigma_n(noise_var * Matrix::Identity(k, k));
  const LinearEstimator f0 = mmse_estimator(nominal, sigma_n);

  RobustnessRow row;
  row.x = x;
  row.mse_f0_nominal = mmse_gaussian(nominal.cov, sigma_n);
  if (epsilon == 0.0) {
    row.mse_f0_lfd = row.mse_f0_nominal;
    row.mse_fstar_nominal = row.mse_f0_nominal;
    row.mse_fstar_lfd = row.mse_f0_nominal;
    return row;
  }
  const KlBall ball(nominal, epsilon);
  const GaussianDist lfd = least_favorable_vs_nominal(ball, sigma_n, cfg);
  row.mse_f0_lfd = mse_linear_under_gaussian(f0, lfd, sigma_n);
  const auto [fstar, sol] = robust_estimator(ball, sigma_n, cfg);
  row.mse_fstar_nominal = mse_linear_under_gaussian(fstar, nominal, sigma_n);
  row.mse_fstar_lfd = mmse_gaussian(sol.sigma_x, sigma_n);
  return row;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double noise_variance_for_snr(const SpdMatrix& sigma_0, double snr_db) {
  const double gamma = std::pow(10.0, snr_db / 10.0);
  return sigma_0.trace() / (sigma_0.dim() * gamma);
}

std::vector<RobustnessRow> sweep_snr(const GaussianDist& nominal, double epsilon,
                                     const std::vector<double>& snr_db_grid,
                                     const SolverConfig& cfg, int threads) {
  std::vector<RobustnessRow> rows(snr_db_grid.size());
  parallel_for(static_cast<int>(snr_db_grid.size()), threads, [&](int i) {
    const double snr_db = snr_db_grid[static_cast<std::size_t>(i)];
    rows[static_cast<std::size_t>(i)] = robustness_point(
        nominal, epsilon, snr_db, noise_variance_for_snr(nominal.cov, snr_db), cfg);
  });
  return rows;
}

std::vector<RobustnessRow> sweep_eps(const GaussianDist& nominal, double snr_db,
                                     const std::vector<double>& eps_grid,
                                     const SolverConfig& cfg, int threads) {
  const double noise_var = noise_variance_for_snr(nominal.cov, snr_db);
  std::vector<RobustnessRow> rows(eps_grid.size());
  parallel_for(static_cast<int>(eps_grid.size()), threads, [&](int i) {
    const double eps = eps_grid[static_cast<std::size_t>(i)];
    rows[static_cast<std::size_t>(i)] = robustness_point(nominal, eps, eps, noise_var, cfg);
  });
  return rows;
}

std::vector<GgRow> sweep_gg(double snr_db, double power, const std::vector<double>& p_grid,
                            int threads) {
  const ScaledChannel chan(std::pow(10.0, snr_db / 10.0));
  std::vector<GgRow> rows(p_grid.size());
  parallel_for(static_cast<int>(p_grid.size()), threads, [&](int i) {
    const double p = p_grid[static_cast<std::size_t>(i)];
    const GeneralizedGaussian dist = gg_from_power(p, power);
    const auto [lo, hi] = gg_kl_mmse_bounds(dist, chan);
    rows[static_cast<std::size_t>(i)] = {p, bayesian_crb(dist, chan), lo, hi,
                                         gg_kl_to_gaussian(p)};
  });
  return rows;
}

std::vector<double> grid_from_step(double start, double stop, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("grid_from_step: step must be > 0");
  if (stop < start) throw std::invalid_argument("grid_from_step: stop < start");
  std::vector<double> grid;
  const int n = static_cast<int>(std::floor((stop - start) / step + 1e-9));
  grid.reserve(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) grid.push_back(start + i * step);
  return grid;
}

std::vector<double> grid_log_spaced(double start, double stop, int points) {
  if (!(start > 0.0) || !(stop > start)) {
    throw std::invalid_argument("grid_log_spaced: need 0 < start < stop");
  }
  if (points < 2) throw std::invalid_argument("grid_log_spaced: need at least 2 points");
  std::vector<double> grid(static_cast<std::size_t>(points));
  const double l0 = std::log(start), l1 = std::log(stop);
  for (int i = 0; i < points; ++i) {
    grid[static_cast<std::size_t>(i)] = std::exp(l0 + (l1 - l0) * i / (points - 1));
  }
  grid.front() = start;
  grid.back() = stop;
  return grid;
}

std::string robustness_csv(const std::vector<RobustnessRow>& rows, const std::string& x_name) {
  std::string out = x_name + ",mse_f0_nominal,mse_f0_lfd,mse_fstar_nominal,mse_fstar_lfd\n";
  for (const RobustnessRow& r : rows) {
    out += format_double(r.x) + ',' + format_double(r.mse_f0_nominal) + ',' +
           format_double(r.mse_f0_lfd) + ',' + format_double(r.mse_fstar_nominal) + ',' +
           format_double(r.mse_fstar_lfd) + '\n';
  }
  return out;
}

std::string gg_csv(const std::vector<GgRow>& rows) {
  std::string out = "p,crb,kl_lower,kl_upper,d_kl\n";
  for (const GgRow& r : rows) {
    out += format_double(r.p) + ',' + format_double(r.crb) + ',' + format_double(r.kl_lower) +
           ',' + format_double(r.kl_upper) + ',' + format_double(r.d_kl) + '\n';
  }
  return out;
}

}  // namespace klmmse
