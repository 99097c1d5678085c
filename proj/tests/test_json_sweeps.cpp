#include <doctest.h>

#include <cmath>
#include <sstream>

#include "klmmse/json_io.hpp"
#include "klmmse/sweeps.hpp"
#include "support/test_util.hpp"

using namespace klmmse;
using testing::random_spd;

namespace {

GaussianDist zero_mean(SpdMatrix cov) {
  const int k = cov.dim();
  return GaussianDist(Vector::Zero(k), std::move(cov));
}

}  // namespace

TEST_CASE("matrix json round trip is bit exact") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const int k = 1 + static_cast<int>(seed % 5);
    Matrix m = random_spd(k, 4000 + seed);
    m(0, 0) = 1.0 / 3.0;  // not exactly representable in decimal
    const std::string text = matrix_to_json(m).dump();
    const Matrix back = matrix_from_json(Json::parse(text));
    CHECK((back - m).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("vector json round trip is bit exact") {
  Vector v(4);
  v << 0.1, -2.5e-13, 3.0, 1e300;
  const Vector back = vector_from_json(Json::parse(vector_to_json(v).dump()));
  CHECK((back - v).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("malformed json inputs are rejected") {
  CHECK_THROWS_AS(matrix_from_json(Json::parse(R"({"dim": 2, "rows": [[1, 0]]})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(matrix_from_json(Json::parse(R"({"rows": [[1]]})")), std::invalid_argument);
  CHECK_THROWS_AS(vector_from_json(Json::parse(R"({"dim": 3})")), std::invalid_argument);
}

TEST_CASE("saddle solution serialization carries the pinned keys") {
  const SpdMatrix sigma_0 = toeplitz_exp_cov(3, 0.9);
  const SpdMatrix sigma_n(Matrix::Identity(3, 3));
  const auto sol = solve_saddle(KlBall(zero_mean(sigma_0), 0.7), sigma_n, Branch::Sup);
  const Json j = solution_to_json(sol);
  CHECK(j.at("branch") == "sup");
  CHECK(j.at("alpha").get<double>() == sol.alpha);
  CHECK(j.at("kl_achieved").get<double>() == sol.kl_achieved);
  CHECK(j.contains("residual_eq3"));
  CHECK(j.contains("residual_eq9"));
  CHECK(j.at("iterations").get<int>() == sol.iterations);
  const Matrix back = matrix_from_json(j.at("sigma_x"));
  CHECK((back - sol.sigma_x.matrix()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("report serialization") {
  BoundsValidationReport report{7, 1, -0.25, {}};
  const Json j = report_to_json(report);
  CHECK(j.at("trials") == 7);
  CHECK(j.at("violations") == 1);
  CHECK(j.at("worst_margin").get<double>() == -0.25);
}

TEST_CASE("grid helpers") {
  const auto lin = grid_from_step(-1.0, 1.0, 0.5);
  CHECK(lin.size() == 5);
  CHECK(lin.front() == -1.0);
  CHECK(lin.back() == doctest::Approx(1.0));

  const auto lg = grid_log_spaced(0.3, 8.0, 10);
  CHECK(lg.size() == 10);
  CHECK(lg.front() == 0.3);
  CHECK(lg.back() == 8.0);
  for (std::size_t i = 1; i < lg.size(); ++i) CHECK(lg[i] > lg[i - 1]);

  CHECK_THROWS_AS(grid_from_step(0.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(grid_log_spaced(0.0, 1.0, 5), std::invalid_argument);
}

TEST_CASE("snr sweep orderings on a small instance") {
  const GaussianDist nominal = zero_mean(toeplitz_exp_cov(4, 0.9));
  const auto rows = sweep_snr(nominal, 1.0, {-5.0, 0.0, 5.0});
  CHECK(rows.size() == 3);
  for (const auto& r : rows) {
    CHECK(r.mse_fstar_lfd <= r.mse_f0_lfd + 1e-10);
    CHECK(r.mse_f0_nominal <= r.mse_fstar_nominal + 1e-10);
    CHECK(r.mse_f0_nominal <= r.mse_f0_lfd);
    CHECK(r.mse_fstar_nominal <= r.mse_fstar_lfd + 1e-10);
  }
}

TEST_CASE("snr sweep is independent of the thread count") {
  const GaussianDist nominal = zero_mean(toeplitz_exp_cov(4, 0.9));
  const auto grid = grid_from_step(-6.0, 6.0, 2.0);
  const auto seq = sweep_snr(nominal, 1.5, grid, {}, 1);
  const auto par = sweep_snr(nominal, 1.5, grid, {}, 4);
  REQUIRE(seq.size() == par.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    CHECK(seq[i].mse_f0_lfd == par[i].mse_f0_lfd);
    CHECK(seq[i].mse_fstar_lfd == par[i].mse_fstar_lfd);
    CHECK(seq[i].mse_fstar_nominal == par[i].mse_fstar_nominal);
  }
}

TEST_CASE("eps sweep starts degenerate and stays ordered") {
  const GaussianDist nominal = zero_mean(toeplitz_exp_cov(4, 0.9));
  const auto rows = sweep_eps(nominal, 0.0, grid_from_step(0.0, 2.0, 0.25));
  CHECK(rows.front().x == 0.0);
  const auto& r0 = rows.front();
  CHECK(r0.mse_f0_lfd == doctest::Approx(r0.mse_f0_nominal).epsilon(1e-12));
  CHECK(r0.mse_fstar_nominal == doctest::Approx(r0.mse_f0_nominal).epsilon(1e-12));
  CHECK(r0.mse_fstar_lfd == doctest::Approx(r0.mse_f0_nominal).epsilon(1e-12));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].mse_f0_nominal == doctest::Approx(rows[0].mse_f0_nominal));
    CHECK(rows[i].mse_fstar_nominal >= rows[i - 1].mse_fstar_nominal - 1e-10);
    const double gap = rows[i].mse_f0_lfd - rows[i].mse_fstar_lfd;
    const double prev_gap = rows[i - 1].mse_f0_lfd - rows[i - 1].mse_fstar_lfd;
    CHECK(gap >= prev_gap - 1e-10);
  }
}

TEST_CASE("gg sweep collapses at the Gaussian shape") {
  const auto rows = sweep_gg(5.0, 1.0, {0.4, 1.0, 2.0, 6.0});
  const double gamma = std::pow(10.0, 0.5);
  for (const auto& r : rows) {
    CHECK(r.kl_lower <= r.kl_upper);
    if (r.p == 2.0) {
      CHECK(r.kl_lower == doctest::Approx(1.0 / (gamma + 1.0)).epsilon(1e-10));
      CHECK(r.kl_upper == doctest::Approx(r.kl_lower).epsilon(1e-12));
      CHECK(r.crb == doctest::Approx(r.kl_lower).epsilon(1e-10));
      CHECK(r.d_kl == 0.0);
    }
    if (r.p == 0.4) {
      CHECK(r.crb == 0.0);
      CHECK(r.kl_lower > 0.0);
    }
  }
}

TEST_CASE("csv output format") {
  const GaussianDist nominal = zero_mean(SpdMatrix(Matrix::Identity(2, 2)));
  const auto rows = sweep_eps(nominal, 0.0, {0.0, 0.5});
  const std::string csv = robustness_csv(rows, "epsilon");

  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "epsilon,mse_f0_nominal,mse_f0_lfd,mse_fstar_nominal,mse_fstar_lfd");

  std::string row;
  std::getline(lines, row);
  std::istringstream cells(row);
  std::string cell;
  int count = 0;
  while (std::getline(cells, cell, ',')) {
    CHECK(cell.find(';') == std::string::npos);
    // values must parse back exactly (17 significant digits round-trip)
    const double parsed = std::stod(cell);
    if (count == 1) CHECK(parsed == rows[0].mse_f0_nominal);
    ++count;
  }
  CHECK(count == 5);
  CHECK(csv.find("\r\n") == std::string::npos);
  CHECK(csv.back() == '\n');
}
