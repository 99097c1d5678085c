#include "klmmse/white.hpp"

#include <cmath>
#include <stdexcept>

#include "klmmse/lambert_w.hpp"

namespace klmmse {

WhiteInstance::WhiteInstance(int dim_, double sigma0_sq_, double sigmaN_sq_, double epsilon_)
    : dim(dim_), sigma0_sq(sigma0_sq_), sigmaN_sq(sigmaN_sq_), epsilon(epsilon_) {
  if (dim <= 0) throw std::invalid_argument("WhiteInstance: dim must be positive");
  if (!(sigma0_sq > 0.0)) throw std::invalid_argument("WhiteInstance: sigma0_sq must be > 0");
  if (!(sigmaN_sq > 0.0)) throw std::invalid_argument("WhiteInstance: sigmaN_sq must be > 0");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("WhiteInstance: epsilon must be >= 0");
}

std::pair<double, double> white_variances(const WhiteInstance& inst) {
  if (inst.epsilon == 0.0) {
    // Both Lambert branches meet at -1 for x = -1/e.
    return {inst.sigma0_sq, inst.sigma0_sq};
  }
  const double c = 1.0 + 2.0 * inst.epsilon / inst.dim;
  const double x = -std::exp(-c);
  if (x == 0.0) {
    // -e^{-c} underflowed. The small root of r - ln r = c lies below the
    // double range; the large one follows from Newton on the equation itself.
    double r = c + std::log(c);
    for (int i = 0; i < 100; ++i) {
      const double step = (r - std::log(r) - c) / (1.0 - 1.0 / r);
      r -= step;
      if (std::abs(step) <= 1e-15 * r) break;
    }
    return {0.0, r * inst.sigma0_sq};
  }
  const double s_inf = -lambert_w(LambertBranch::Principal, x) * inst.sigma0_sq;
  const double s_sup = -lambert_w(LambertBranch::MinusOne, x) * inst.sigma0_sq;
  return {s_inf, s_sup};
}

std::pair<double, double> white_bounds(const WhiteInstance& inst) {
  const auto [s_inf, s_sup] = white_variances(inst);
  const auto per_dim = [&](double s) { return s * inst.sigmaN_sq / (s + inst.sigmaN_sq); };
  return {inst.dim * per_dim(s_inf), inst.dim * per_dim(s_sup)};
}

}  // namespace klmmse
