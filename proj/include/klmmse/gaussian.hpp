#pragma once

#include <vector>

#include "klmmse/spd_matrix.hpp"

namespace klmmse {

/// Multivariate Gaussian N(mean, cov).
struct GaussianDist {
  Vector mean;
  SpdMatrix cov;

  GaussianDist(Vector mean_, SpdMatrix cov_);
  int dim() const { return cov.dim(); }
};

/// The four matrices derived from a signal/noise covariance pair:
///   w_x = Sx (Sx+Sn)^{-1},  w_n = Sn (Sx+Sn)^{-1},
///   d_x = Sn w_x^T w_x,     d_n = Sx w_n^T w_n.
/// Invariant: w_x + w_n = I.
struct ChannelOperators {
  Matrix w_x;
  Matrix w_n;
  Matrix d_x;
  Matrix d_n;
};

/// KL ball { P : KL(P || center) <= radius } around a Gaussian reference.
struct KlBall {
  GaussianDist center;
  double radius;  // nats

  KlBall(GaussianDist center_, double radius_);
};

/// Affine estimator f(y) = gain*y + (I - gain)*anchor_mean.
struct LinearEstimator {
  Matrix gain;
  Vector anchor_mean;

  LinearEstimator(Matrix gain_, Vector anchor_mean_);
  int dim() const { return static_cast<int>(gain.rows()); }
};

/// Derived channel matrices, computed with linear solves (no explicit inverse).
ChannelOperators channel_operators(const SpdMatrix& sigma_x, const SpdMatrix& sigma_n);

/// MMSE of the Gaussian channel Y = X + N with X ~ N(mu, sigma_x):
/// tr(d_x) + tr(d_n).
double mmse_gaussian(const SpdMatrix& sigma_x, const SpdMatrix& sigma_n);

/// The Bayes estimator for a Gaussian prior: gain w_x, anchored at the prior mean.
LinearEstimator mmse_estimator(const GaussianDist& prior, const SpdMatrix& sigma_n);

Vector apply_estimator(const LinearEstimator& est, const Vector& y);

/// KL(p || q) for Gaussians, general means:
/// 0.5*(tr(Sp Sq^{-1}) - K - logdet(Sp Sq^{-1}) + (mp-mq)^T Sq^{-1} (mp-mq)).
double kl_gaussian(const GaussianDist& p, const GaussianDist& q);

/// Exact MSE of an affine estimator under a Gaussian prior and Gaussian noise:
/// tr(Sn W^T W) + tr(M Sx) + (mx-m0)^T M (mx-m0),  M = (I-W)^T (I-W).
double mse_linear_under_gaussian(const LinearEstimator& est, const GaussianDist& prior,
                                 const SpdMatrix& sigma_n);

/// n conditionally iid observations collapse to one with covariance Sn/n and
/// the averaged observation.
std::pair<SpdMatrix, Vector> reduce_observations(const SpdMatrix& sigma_n,
                                                 const std::vector<Vector>& observations);

}  // namespace klmmse
