#pragma once

#include <utility>

namespace klmmse {

/// Isotropic signal/noise instance: Sigma_0 = sigma0_sq*I, Sigma_N = sigmaN_sq*I.
struct WhiteInstance {
  int dim;
  double sigma0_sq;
  double sigmaN_sq;
  double epsilon;  // nats

  WhiteInstance(int dim_, double sigma0_sq_, double sigmaN_sq_, double epsilon_);
};

/// Closed-form least-favorable variances via the Lambert W branches.
/// With c = 1 + 2*eps/K both returned variances satisfy the scalar KL
/// equation r - ln r = c (r = s / sigma0_sq). Returns (s_inf, s_sup) with
/// s_inf <= sigma0_sq <= s_sup; s_inf belongs to the shrinking branch of the
/// optimality system (alpha <= 0), s_sup to the expanding one (alpha >= 0).
std::pair<double, double> white_variances(const WhiteInstance& inst);

/// MMSE bounds for the white instance: K * s*sigmaN_sq/(s+sigmaN_sq)
/// evaluated at s_inf (lower) and s_sup (upper).
std::pair<double, double> white_bounds(const WhiteInstance& inst);

}  // namespace klmmse
