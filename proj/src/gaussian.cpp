#include "klmmse/gaussian.hpp"

#include <stdexcept>

namespace klmmse {

namespace {

void check_same_dim(int a, int b, const char* where) {
  if (a != b) {
    throw std::invalid_argument(std::string(where) + ": dimension mismatch");
  }
}

}  // namespace

GaussianDist::GaussianDist(Vector mean_, SpdMatrix cov_)
    : mean(std::move(mean_)), cov(std::move(cov_)) {
  check_same_dim(static_cast<int>(mean.size()), cov.dim(), "GaussianDist");
}

KlBall::KlBall(GaussianDist center_, double radius_)
    : center(std::move(center_)), radius(radius_) {
  if (!(radius >= 0.0)) throw std::invalid_argument("KlBall: radius must be >= 0");
}

LinearEstimator::LinearEstimator(Matrix gain_, Vector anchor_mean_)
    : gain(std::move(gain_)), anchor_mean(std::move(anchor_mean_)) {
  if (gain.rows() != gain.cols()) {
    throw std::invalid_argument("LinearEstimator: gain must be square");
  }
  check_same_dim(static_cast<int>(gain.rows()), static_cast<int>(anchor_mean.size()),
                 "LinearEstimator");
}

ChannelOperators channel_operators(const SpdMatrix& sigma_x, const SpdMatrix& sigma_n) {
  check_same_dim(sigma_x.dim(), sigma_n.dim(), "channel_operators");
  const SpdMatrix sum(sigma_x.matrix() + sigma_n.matrix());
  // Sx (Sx+Sn)^{-1} = [ (Sx+Sn)^{-1} Sx ]^T since both factors are symmetric.
  ChannelOperators ops;
  ops.w_x = sum.solve(sigma_x.matrix()).transpose();
  ops.w_n = sum.solve(sigma_n.matrix()).transpose();
  ops.d_x = sigma_n.matrix() * ops.w_x.transpose() * ops.w_x;
  ops.d_n = sigma_x.matrix() * ops.w_n.transpose() * ops.w_n;
  return ops;
}

double mmse_gaussian(const SpdMatrix& sigma_x, const SpdMatrix& sigma_n) {
  const ChannelOperators ops = channel_operators(sigma_x, sigma_n);
  return ops.d_x.trace() + ops.d_n.trace();
}

LinearEstimator mmse_estimator(const GaussianDist& prior, const SpdMatrix& sigma_n) {
  ChannelOperators ops = channel_operators(prior.cov, sigma_n);
  return LinearEstimator(std::move(ops.w_x), prior.mean);
}

Vector apply_estimator(const LinearEstimator& est, const Vector& y) {
  check_same_dim(est.dim(), static_cast<int>(y.size()), "apply_estimator");
  return est.gain * y + (est.anchor_mean - est.gain * est.anchor_mean);
}

double kl_gaussian(const GaussianDist& p, const GaussianDist& q) {
  check_same_dim(p.dim(), q.dim(), "kl_gaussian");
  const int k = p.dim();
  const Matrix ratio = q.cov.solve(p.cov.matrix());  // Sq^{-1} Sp
  const Vector dmu = p.mean - q.mean;
  const double log_det_ratio = p.cov.log_det() - q.cov.log_det();
  return 0.5 * (ratio.trace() - k - log_det_ratio + dmu.dot(q.cov.solve(dmu)));
}

double mse_linear_under_gaussian(const LinearEstimator& est, const GaussianDist& prior,
                                 const SpdMatrix& sigma_n) {
  check_same_dim(est.dim(), prior.dim(), "mse_linear_under_gaussian");
  check_same_dim(est.dim(), sigma_n.dim(), "mse_linear_under_gaussian");
  const int k = est.dim();
  const Matrix& w = est.gain;
  const Matrix iw = Matrix::Identity(k, k) - w;
  const Matrix m = iw.transpose() * iw;
  const Vector dmu = prior.mean - est.anchor_mean;
  return (sigma_n.matrix() * w.transpose() * w).trace() + (m * prior.cov.matrix()).trace() +
         dmu.dot(m * dmu);
}

std::pair<SpdMatrix, Vector> reduce_observations(const SpdMatrix& sigma_n,
                                                 const std::vector<Vector>& observations) {
  if (observations.empty()) {
    throw std::invalid_argument("reduce_observations: need at least one observation");
  }
  const auto n = static_cast<double>(observations.size());
  Vector mean = Vector::Zero(sigma_n.dim());
  for (const Vector& y : observations) {
    check_same_dim(sigma_n.dim(), static_cast<int>(y.size()), "reduce_observations");
    mean += y;
  }
  mean /= n;
  return {SpdMatrix(sigma_n.matrix() / n), std::move(mean)};
}

}  // namespace klmmse
