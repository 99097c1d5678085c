#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "klmmse/gaussian.hpp"
#include "support/test_util.hpp"

using namespace klmmse;
using testing::random_spd;
using testing::random_vector;

namespace {

SpdMatrix scalar_cov(double v) { return SpdMatrix(v * Matrix::Identity(1, 1)); }

GaussianDist scalar_gaussian(double mean, double var) {
  Vector m(1);
  m << mean;
  return GaussianDist(m, scalar_cov(var));
}

}  // namespace

TEST_CASE("SpdMatrix construction") {
  Matrix good(2, 2);
  good << 2.0, 0.5, 0.5, 1.0;
  const SpdMatrix spd(good);
  CHECK(spd.dim() == 2);
  CHECK(spd.matrix()(0, 1) == spd.matrix()(1, 0));

  Matrix asym(2, 2);
  asym << 2.0, 0.5, 0.7, 1.0;
  CHECK_THROWS_AS(SpdMatrix{asym}, std::invalid_argument);

  Matrix indef(2, 2);
  indef << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(SpdMatrix{indef}, std::invalid_argument);

  // small asymmetry within tolerance gets symmetrized away
  Matrix nearly = good;
  nearly(0, 1) += 1e-15;
  CHECK_NOTHROW(SpdMatrix{nearly});
}

TEST_CASE("SpdMatrix log_det and solve match explicit computation") {
  const SpdMatrix a(random_spd(5, 11));
  CHECK(a.log_det() == doctest::Approx(std::log(a.matrix().determinant())).epsilon(1e-12));
  const Matrix id_check = a.matrix() * a.inverse();
  CHECK((id_check - Matrix::Identity(5, 5)).norm() < 1e-12);
}

TEST_CASE("toeplitz_exp_cov") {
  const SpdMatrix cov = toeplitz_exp_cov(10, 0.9);
  CHECK(cov.matrix()(0, 1) == doctest::Approx(std::exp(-0.9)).epsilon(1e-15));
  CHECK(cov.trace() == doctest::Approx(10.0).epsilon(1e-15));

  CHECK(toeplitz_exp_cov(1, 0.3).matrix()(0, 0) == 1.0);

  // diagonal limit for large rate
  const SpdMatrix nearly_id = toeplitz_exp_cov(4, 1e4);
  CHECK((nearly_id.matrix() - Matrix::Identity(4, 4)).norm() < 1e-300);

  CHECK_THROWS_AS(toeplitz_exp_cov(4, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(toeplitz_exp_cov(4, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(toeplitz_exp_cov(0, 1.0), std::invalid_argument);
}

TEST_CASE("channel_operators scalar and white cases") {
  const auto ops = channel_operators(scalar_cov(1.0), scalar_cov(1.0));
  CHECK(ops.w_x(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(ops.d_x(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(ops.d_n(0, 0) == doctest::Approx(0.25).epsilon(1e-15));

  const double s = 3.0, n = 2.0;
  const auto white = channel_operators(SpdMatrix(s * Matrix::Identity(4, 4)),
                                       SpdMatrix(n * Matrix::Identity(4, 4)));
  CHECK((white.w_x - s / (s + n) * Matrix::Identity(4, 4)).norm() < 1e-14);
}

TEST_CASE("channel_operators vs explicit-inverse oracle") {
  const SpdMatrix sigma_x = toeplitz_exp_cov(2, 0.9);
  const SpdMatrix sigma_n(Matrix::Identity(2, 2));
  const auto ops = channel_operators(sigma_x, sigma_n);

  const Matrix inv = (sigma_x.matrix() + sigma_n.matrix()).inverse();
  const Matrix w_x = sigma_x.matrix() * inv;
  const Matrix w_n = sigma_n.matrix() * inv;
  CHECK((ops.w_x - w_x).norm() < 1e-12);
  CHECK((ops.w_n - w_n).norm() < 1e-12);
  CHECK((ops.d_x - sigma_n.matrix() * w_x.transpose() * w_x).norm() < 1e-12);
  CHECK((ops.d_n - sigma_x.matrix() * w_n.transpose() * w_n).norm() < 1e-12);
}

TEST_CASE("channel_operators properties on random pairs") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const int k = 1 + static_cast<int>(seed % 6);
    const SpdMatrix sx(random_spd(k, 100 + seed));
    const SpdMatrix sn(random_spd(k, 200 + seed));
    const auto ops = channel_operators(sx, sn);
    CHECK((ops.w_x + ops.w_n - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(ops.d_x.trace() >= 0.0);
    CHECK(ops.d_n.trace() >= 0.0);
  }
  CHECK_THROWS_AS(channel_operators(SpdMatrix(Matrix::Identity(2, 2)),
                                    SpdMatrix(Matrix::Identity(3, 3))),
                  std::invalid_argument);
}

TEST_CASE("mmse_gaussian values and identity-form oracle") {
  CHECK(mmse_gaussian(scalar_cov(1.0), scalar_cov(1.0)) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(mmse_gaussian(scalar_cov(1.0), scalar_cov(1e6)) == doctest::Approx(1.0).epsilon(1e-4));

  const SpdMatrix sigma_x = toeplitz_exp_cov(10, 0.9);
  const SpdMatrix sigma_n(Matrix::Identity(10, 10));
  const Matrix sum_inv = (sigma_x.matrix() + sigma_n.matrix()).inverse();
  const double oracle =
      (sigma_x.matrix() - sigma_x.matrix() * sum_inv * sigma_x.matrix()).trace();
  CHECK(mmse_gaussian(sigma_x, sigma_n) == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("mmse_gaussian identity holds on random pairs") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const int k = 1 + static_cast<int>(seed % 5);
    const SpdMatrix sx(random_spd(k, 300 + seed));
    const SpdMatrix sn(random_spd(k, 400 + seed));
    const double direct = mmse_gaussian(sx, sn);
    const Matrix sum_inv = (sx.matrix() + sn.matrix()).inverse();
    const double identity_form = (sx.matrix() - sx.matrix() * sum_inv * sx.matrix()).trace();
    CHECK(direct == doctest::Approx(identity_form).epsilon(1e-10));
  }
}

TEST_CASE("mmse_gaussian is monotone in the Loewner order") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const int k = 2 + static_cast<int>(seed % 4);
    const Matrix base = random_spd(k, 500 + seed);
    const Matrix bump = random_spd(k, 600 + seed, 0.0);
    const SpdMatrix sn(random_spd(k, 700 + seed));
    CHECK(mmse_gaussian(SpdMatrix(base), sn) <=
          mmse_gaussian(SpdMatrix(base + bump), sn) + 1e-12);
  }
}

TEST_CASE("mmse_estimator") {
  const auto est = mmse_estimator(scalar_gaussian(0.0, 1.0), scalar_cov(1.0));
  Vector y(1);
  y << 2.0;
  CHECK(apply_estimator(est, y)[0] == doctest::Approx(1.0).epsilon(1e-14));

  // noiseless limit: gain -> I
  const auto sharp = mmse_estimator(GaussianDist(Vector::Zero(3), toeplitz_exp_cov(3, 0.5)),
                                    SpdMatrix(1e-10 * Matrix::Identity(3, 3)));
  CHECK((sharp.gain - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("apply_estimator") {
  const int k = 2;
  Vector mu(k), y(k);
  mu << 2.0, 2.0;
  y << 0.0, 0.0;
  CHECK((apply_estimator(LinearEstimator(Matrix::Identity(k, k), mu), y) - y).norm() == 0.0);
  CHECK((apply_estimator(LinearEstimator(Matrix::Zero(k, k), mu), y) - mu).norm() == 0.0);
  Vector mid(k);
  mid << 1.0, 1.0;
  CHECK((apply_estimator(LinearEstimator(0.5 * Matrix::Identity(k, k), mu), y) - mid).norm() <
        1e-15);
  Vector wrong(3);
  CHECK_THROWS_AS(apply_estimator(LinearEstimator(Matrix::Identity(k, k), mu), wrong),
                  std::invalid_argument);
}

TEST_CASE("kl_gaussian closed-form values") {
  const auto p = scalar_gaussian(0.0, 2.0);
  const auto q = scalar_gaussian(0.0, 1.0);
  CHECK(kl_gaussian(p, p) == doctest::Approx(0.0).epsilon(1e-14));
  // 0.5*(2 - 1 - ln 2)
  CHECK(kl_gaussian(p, q) == doctest::Approx(0.5 * (2.0 - 1.0 - std::log(2.0))).epsilon(1e-12));
  CHECK(kl_gaussian(scalar_gaussian(1.0, 1.0), scalar_gaussian(0.0, 1.0)) ==
        doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("kl_gaussian is nonnegative and separates distributions") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const int k = 1 + static_cast<int>(seed % 5);
    const GaussianDist p(random_vector(k, 800 + seed), SpdMatrix(random_spd(k, 900 + seed)));
    const GaussianDist q(random_vector(k, 1000 + seed), SpdMatrix(random_spd(k, 1100 + seed)));
    const double kl = kl_gaussian(p, q);
    CHECK(kl >= 0.0);
    CHECK(kl_gaussian(p, p) < 1e-10);
    if ((p.mean - q.mean).norm() + (p.cov.matrix() - q.cov.matrix()).norm() > 1e-3) {
      CHECK(kl > 1e-10);
    }
  }
}

TEST_CASE("mse_linear_under_gaussian") {
  const auto prior = scalar_gaussian(0.0, 1.0);
  const auto noise = scalar_cov(1.0);
  CHECK(mse_linear_under_gaussian(mmse_estimator(prior, noise), prior, noise) ==
        doctest::Approx(0.5).epsilon(1e-14));

  // W = I passes the noise through
  const SpdMatrix sn(random_spd(4, 42));
  const GaussianDist p4(Vector::Zero(4), SpdMatrix(random_spd(4, 43)));
  CHECK(mse_linear_under_gaussian(LinearEstimator(Matrix::Identity(4, 4), Vector::Zero(4)), p4,
                                  sn) == doctest::Approx(sn.trace()).epsilon(1e-12));
}

TEST_CASE("matched estimator attains the channel MMSE") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int k = 1 + static_cast<int>(seed % 5);
    const GaussianDist p(random_vector(k, 1200 + seed), SpdMatrix(random_spd(k, 1300 + seed)));
    const SpdMatrix sn(random_spd(k, 1400 + seed));
    const double matched = mse_linear_under_gaussian(mmse_estimator(p, sn), p, sn);
    CHECK(matched == doctest::Approx(mmse_gaussian(p.cov, sn)).epsilon(1e-10));
  }
}

TEST_CASE("matched estimator is optimal against mismatched priors") {
  const GaussianDist p(Vector::Zero(4), toeplitz_exp_cov(4, 0.7));
  const SpdMatrix sn(Matrix::Identity(4, 4));
  const auto est = mmse_estimator(p, sn);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const GaussianDist q(random_vector(4, 1500 + seed), SpdMatrix(random_spd(4, 1600 + seed)));
    CHECK(mse_linear_under_gaussian(est, q, sn) >= mmse_gaussian(q.cov, sn) - 1e-10);
  }
}

TEST_CASE("reduce_observations") {
  const SpdMatrix sn(Matrix::Identity(2, 2));
  Vector y1(2), y2(2);
  y1 << 0.0, 0.0;
  y2 << 2.0, 4.0;

  const auto [cov1, mean1] = reduce_observations(sn, {y1});
  CHECK((cov1.matrix() - sn.matrix()).norm() == 0.0);
  CHECK((mean1 - y1).norm() == 0.0);

  const auto [cov4, mean4] = reduce_observations(sn, {y1, y1, y1, y1});
  CHECK((cov4.matrix() - 0.25 * Matrix::Identity(2, 2)).norm() < 1e-15);

  const auto [cov2, mean2] = reduce_observations(sn, {y1, y2});
  Vector expected(2);
  expected << 1.0, 2.0;
  CHECK((mean2 - expected).norm() < 1e-15);

  CHECK_THROWS_AS(reduce_observations(sn, {}), std::invalid_argument);
}
