#include "klmmse/lambert_w.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace klmmse {

namespace {

constexpr int kMaxIterations = 50;

// Series around the branch point x = -1/e in p = +-sqrt(2*(1 + e*x)):
// w = -1 + p - p^2/3 + 11 p^3/72 - 43 p^4/540.
double branch_point_series(double p) {
  return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 + p * (-43.0 / 540.0))));
}

double halley(double w, double x) {
  for (int i = 0; i < kMaxIterations; ++i) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    if (f == 0.0) break;
    const double denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0);
    const double step = f / denom;
    w -= step;
    if (std::abs(step) <= 1e-16 * (1.0 + std::abs(w))) break;
  }
  return w;
}

// Newton on w + ln|w| = ln|x|, the log-space form of the defining equation.
// Immune to exp over/underflow in the tails; requires |w| bounded away from 1.
double log_space_newton(double w, double log_abs_x) {
  for (int i = 0; i < kMaxIterations; ++i) {
    const double g = w + std::log(std::abs(w)) - log_abs_x;
    const double step = g * w / (w + 1.0);
    w -= step;
    if (std::abs(step) <= 1e-16 * (1.0 + std::abs(w))) break;
  }
  return w;
}

}  // namespace

double lambert_w(LambertBranch branch, double x) {
  const double branch_point = -std::exp(-1.0);
  if (std::isnan(x)) throw std::domain_error("lambert_w: NaN argument");

  // Tolerate arguments a few ulps below -1/e; they arise from rounding in
  // expressions like -exp(-c).
  if (x < branch_point) {
    if (x > branch_point * (1.0 + 1e-14)) {
      x = branch_point;
    } else {
      throw std::domain_error("lambert_w: argument below -1/e");
    }
  }

  const double q = 2.0 * (1.0 + std::exp(1.0) * x);  // 0 at the branch point
  if (branch == LambertBranch::Principal) {
    if (q <= 0.0) return -1.0;
    const double p = std::sqrt(q);
    if (p < 1e-4) return branch_point_series(p);
    if (x < -0.25) return halley(branch_point_series(p), x);
    if (x <= 0.25) {
      return halley(x * (1.0 + x * (-1.0 + x * (1.5 - x * 8.0 / 3.0))), x);
    }
    if (x <= std::exp(1.0)) return halley(std::log(1.0 + x), x);
    const double l1 = std::log(x);
    const double l2 = std::log(l1);
    return log_space_newton(l1 - l2 + l2 / l1, l1);
  }

  if (!(x < 0.0)) throw std::domain_error("lambert_w: branch -1 needs x in [-1/e, 0)");
  if (q <= 0.0) return -1.0;
  const double p = std::sqrt(q);
  if (p < 1e-4) return branch_point_series(-p);
  if (p < 0.75) return halley(branch_point_series(-p), x);
  const double l1 = std::log(-x);
  const double l2 = std::log(-l1);
  return log_space_newton(l1 - l2 + l2 / l1, l1);
}

}  // namespace klmmse
