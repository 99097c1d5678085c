#include "klmmse/gg.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "klmmse/white.hpp"

namespace klmmse {

namespace {

// Lanczos g = 7, 9 coefficients.
constexpr double kLanczos[9] = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7,
};
constexpr double kLanczosG = 7.0;

double lanczos_gamma(double x) {
  // valid for x >= 0.5
  const double z = x - 1.0;
  double a = kLanczos[0];
  for (int i = 1; i < 9; ++i) a += kLanczos[i] / (z + i);
  const double t = z + kLanczosG + 0.5;
  return std::sqrt(2.0 * M_PI) * std::pow(t, z + 0.5) * std::exp(-t) * a;
}

}  // namespace

double gamma_fn(double x) {
  if (!(x > 0.0)) throw std::domain_error("gamma_fn: argument must be positive");
  if (x < 0.5) return lanczos_gamma(x + 1.0) / x;
  return lanczos_gamma(x);
}

GeneralizedGaussian::GeneralizedGaussian(double scale_, double shape_)
    : scale(scale_), shape(shape_) {
  if (!(scale > 0.0)) throw std::invalid_argument("GeneralizedGaussian: scale must be > 0");
  if (!(shape > 0.0)) throw std::invalid_argument("GeneralizedGaussian: shape must be > 0");
}

double GeneralizedGaussian::second_moment() const {
  return scale * scale * gamma_fn(3.0 / shape) / gamma_fn(1.0 / shape);
}

ScaledChannel::ScaledChannel(double snr_) : snr(snr_) {
  if (!(snr > 0.0)) throw std::invalid_argument("ScaledChannel: snr must be > 0");
}

GeneralizedGaussian gg_from_power(double shape, double b_sq) {
  if (!(b_sq > 0.0)) throw std::invalid_argument("gg_from_power: b_sq must be > 0");
  const double a = std::sqrt(gamma_fn(1.0 / shape) / gamma_fn(3.0 / shape) * b_sq);
  return GeneralizedGaussian(a, shape);
}

double gg_density(const GeneralizedGaussian& dist, double x) {
  const double a = dist.scale, p = dist.shape;
  return p / (2.0 * a * gamma_fn(1.0 / p)) * std::exp(-std::pow(std::abs(x) / a, p));
}

double gg_fisher_information(const GeneralizedGaussian& dist) {
  const double p = dist.shape;
  if (p <= 0.5) return std::numeric_limits<double>::infinity();
  return p * p / (dist.scale * dist.scale) * gamma_fn(2.0 - 1.0 / p) / gamma_fn(1.0 / p);
}

double bayesian_crb(const GeneralizedGaussian& dist, const ScaledChannel& chan) {
  const double fisher = gg_fisher_information(dist);
  if (std::isinf(fisher)) return 0.0;
  return 1.0 / (chan.snr + fisher);
}

double gg_kl_to_gaussian(double shape) {
  if (!(shape > 0.0)) throw std::domain_error("gg_kl_to_gaussian: shape must be > 0");
  const double p = shape;
  const double value = std::log(p / std::sqrt(2.0) *
                                std::sqrt(gamma_fn(3.0 / p) / gamma_fn(1.0 / p)) *
                                gamma_fn(0.5) / gamma_fn(1.0 / p)) +
                       0.5 - 1.0 / p;
  // The expression is analytically >= 0 and vanishes only at p = 2; values
  // below the gamma-evaluation rounding floor are noise.
  if (std::abs(value) < 1e-13) return 0.0;
  return value;
}

std::pair<double, double> gg_kl_mmse_bounds(const GeneralizedGaussian& dist,
                                            const ScaledChannel& chan) {
  const double eps = gg_kl_to_gaussian(dist.shape);
  const WhiteInstance inst(1, chan.snr * dist.second_moment(), 1.0, eps);
  const auto [lo, hi] = white_bounds(inst);
  return {lo / chan.snr, hi / chan.snr};
}

}  // namespace klmmse
