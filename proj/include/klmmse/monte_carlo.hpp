#pragma once

#include <cstdint>
#include <vector>

#include "klmmse/gaussian.hpp"

namespace klmmse {

struct McConfig {
  std::int64_t samples = 1000000;
  std::uint64_t seed = 0;

  McConfig(std::int64_t samples_, std::uint64_t seed_);
};

struct McEstimate {
  double mean;
  double std_error;
  std::int64_t samples;
};

/// Draws from a Gaussian: mean + chol(cov) * z with standard normals from a
/// Box-Muller NormalStream seeded directly with `seed`; each draw consumes
/// K normals in sequence. Deterministic per seed.
std::vector<Vector> sample_gaussian(const GaussianDist& dist, std::int64_t count,
                                    std::uint64_t seed);

/// Seeded Monte-Carlo estimate of E || f(x + n) - x ||^2. Prior draws use the
/// sub-stream derive_seed(seed, 1), noise draws derive_seed(seed, 2); both
/// streams fill sample blocks column-major.
McEstimate mc_mse(const LinearEstimator& est, const GaussianDist& prior,
                  const SpdMatrix& sigma_n, const McConfig& cfg);

struct BoundsTrial {
  double mmse_estimate;
  double std_error;
  double margin;  // distance inside [lower - 4se, upper + 4se]; negative = violation
  bool pass;
};

struct BoundsValidationReport {
  int trials;
  int violations;
  double worst_margin;
  std::vector<BoundsTrial> results;
};

/// For `trials` in-ball Gaussians Q (drawn with sample_in_ball_gaussians at
/// derive_seed(seed, 1000)), Monte-Carlo-estimates MMSE(Q) via the estimator
/// matched to Q (per-trial stream derive_seed(seed, trial)) and checks
/// lower - 4se <= estimate <= upper + 4se against the analytic ball bounds.
/// Failures are reported, not thrown.
BoundsValidationReport mc_verify_bounds(const KlBall& ball, const SpdMatrix& sigma_n,
                                        const McConfig& cfg, int trials, std::uint64_t seed);

}  // namespace klmmse
