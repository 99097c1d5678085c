#include "klmmse/monte_carlo.hpp"

#include <cmath>
#include <stdexcept>

#include "klmmse/rng.hpp"
#include "klmmse/saddle.hpp"

namespace klmmse {

McConfig::McConfig(std::int64_t samples_, std::uint64_t seed_) : samples(samples_), seed(seed_) {
  if (samples < 1) throw std::invalid_argument("McConfig: samples must be >= 1");
}

std::vector<Vector> sample_gaussian(const GaussianDist& dist, std::int64_t count,
                                    std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_gaussian: count must be >= 1");
  const int k = dist.dim();
  const Matrix chol = dist.cov.llt().matrixL();
  NormalStream normals(seed);
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(count));
  Vector z(k);
  for (std::int64_t i = 0; i < count; ++i) {
    for (int r = 0; r < k; ++r) z[r] = normals.next();
    out.push_back(dist.mean + chol * z);
  }
  return out;
}

McEstimate mc_mse(const LinearEstimator& est, const GaussianDist& prior,
                  const SpdMatrix& sigma_n, const McConfig& cfg) {
  if (est.dim() != prior.dim() || est.dim() != sigma_n.dim()) {
    throw std::invalid_argument("mc_mse: dimension mismatch");
  }
  const int k = prior.dim();
  const Matrix chol_x = prior.cov.llt().matrixL();
  const Matrix chol_n = sigma_n.llt().matrixL();
  const Vector offset = est.anchor_mean - est.gain * est.anchor_mean;

  NormalStream stream_x(derive_seed(cfg.seed, 1));
  NormalStream stream_n(derive_seed(cfg.seed, 2));

  constexpr std::int64_t kBlock = 4096;
  Matrix zx(k, kBlock), zn(k, kBlock);
  double sum = 0.0, sum_sq = 0.0;
  std::int64_t done = 0;
  while (done < cfg.samples) {
    const auto b = static_cast<int>(std::min<std::int64_t>(kBlock, cfg.samples - done));
    for (int c = 0; c < b; ++c)
      for (int r = 0; r < k; ++r) zx(r, c) = stream_x.next();
    for (int c = 0; c < b; ++c)
      for (int r = 0; r < k; ++r) zn(r, c) = stream_n.next();
    const Matrix x = (chol_x * zx.leftCols(b)).colwise() + prior.mean;
    const Matrix y = x + chol_n * zn.leftCols(b);
    const Matrix err = ((est.gain * y).colwise() + offset) - x;
    for (int c = 0; c < b; ++c) {
      const double e = err.col(c).squaredNorm();
      sum += e;
      sum_sq += e * e;
    }
    done += b;
  }
  const auto n = static_cast<double>(cfg.samples);
  const double mean = sum / n;
  double se = 0.0;
  if (cfg.samples > 1) {
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    se = std::sqrt(var / n);
  }
  return {mean, se, cfg.samples};
}

BoundsValidationReport mc_verify_bounds(const KlBall& ball, const SpdMatrix& sigma_n,
                                        const McConfig& cfg, int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("mc_verify_bounds: trials must be >= 1");
  const auto [lower, upper] = mmse_bounds(ball, sigma_n);
  const std::vector<GaussianDist> priors =
      sample_in_ball_gaussians(ball, trials, derive_seed(seed, 1000));

  BoundsValidationReport report{trials, 0, std::numeric_limits<double>::infinity(), {}};
  report.results.reserve(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    const GaussianDist& q = priors[static_cast<std::size_t>(t)];
    const LinearEstimator matched = mmse_estimator(q, sigma_n);
    const McEstimate est =
        mc_mse(matched, q, sigma_n, McConfig(cfg.samples, derive_seed(seed, static_cast<std::uint64_t>(t))));
    const double band = 4.0 * est.std_error;
    const double margin = std::min(est.mean - (lower - band), (upper + band) - est.mean);
    const bool pass = margin >= 0.0;
    if (!pass) ++report.violations;
    report.worst_margin = std::min(report.worst_margin, margin);
    report.results.push_back({est.mean, est.std_error, margin, pass});
  }
  return report;
}

}  // namespace klmmse
