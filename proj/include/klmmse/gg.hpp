#pragma once

#include <utility>

namespace klmmse {

/// Zero-mean generalized Gaussian with density p/(2a*Gamma(1/p)) * exp(-(|x|/a)^p).
/// Gaussian at p = 2, Laplace at p = 1. Second moment a^2*Gamma(3/p)/Gamma(1/p).
struct GeneralizedGaussian {
  double scale;  // a > 0
  double shape;  // p > 0

  GeneralizedGaussian(double scale_, double shape_);
  double second_moment() const;
};

/// Scalar channel Y = sqrt(snr)*X + N with unit-variance Gaussian noise.
struct ScaledChannel {
  double snr;  // linear, > 0

  explicit ScaledChannel(double snr_);
};

/// Gamma function on the positive real axis, Lanczos approximation
/// (g = 7, 9 coefficients); arguments in (0, 0.5) go through the
/// recurrence Gamma(x) = Gamma(x+1)/x. Throws std::domain_error for x <= 0.
double gamma_fn(double x);

/// The scale that gives E[X^2] = b_sq for shape p:
/// a = sqrt(Gamma(1/p)/Gamma(3/p) * b_sq).
GeneralizedGaussian gg_from_power(double shape, double b_sq);

double gg_density(const GeneralizedGaussian& dist, double x);

/// Fisher information p^2/a^2 * Gamma(2-1/p)/Gamma(1/p) for p > 1/2,
/// +infinity for p <= 1/2 (encoded, not thrown).
double gg_fisher_information(const GeneralizedGaussian& dist);

/// Bayesian Cramer-Rao bound 1/(snr + I); 0 when I is infinite.
double bayesian_crb(const GeneralizedGaussian& dist, const ScaledChannel& chan);

/// KL divergence from G(a, p) to the nearest Gaussian (the one matching its
/// second moment); depends on the shape only:
///   d(p) = ln( p/sqrt(2) * sqrt(Gamma(3/p)/Gamma(1/p)) * Gamma(1/2)/Gamma(1/p) ) + 1/2 - 1/p.
/// Values below the rounding floor of the gamma evaluations (1e-13) are
/// snapped to exactly 0; analytically d(p) >= 0 with equality only at p = 2.
double gg_kl_to_gaussian(double shape);

/// (lower, upper) MMSE bounds for X ~ G(a, p) over the channel
/// Y = sqrt(snr)*X + N: the white-instance bounds at radius d(p), with the
/// scaled prior variance snr*E[X^2], unit noise, and the MMSE mapped back
/// through mmse_X = mmse_{sqrt(snr) X} / snr.
std::pair<double, double> gg_kl_mmse_bounds(const GeneralizedGaussian& dist,
                                            const ScaledChannel& chan);

}  // namespace klmmse
