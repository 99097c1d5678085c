#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "klmmse/gaussian.hpp"
#include "klmmse/gg.hpp"
#include "klmmse/lambert_w.hpp"
#include "klmmse/monte_carlo.hpp"
#include "klmmse/saddle.hpp"
#include "klmmse/sweeps.hpp"
#include "klmmse/white.hpp"

namespace py = pybind11;
using namespace klmmse;

namespace {

GaussianDist make_gaussian(const Vector& mean, const Matrix& cov) {
  return GaussianDist(mean, SpdMatrix(cov));
}

Branch branch_from_string(const std::string& name) {
  if (name == "sup") return Branch::Sup;
  if (name == "inf") return Branch::Inf;
  throw std::invalid_argument("branch must be 'sup' or 'inf'");
}

SolverConfig config_from_kwargs(double tol_kl, double tol_fixed_point, int max_inner_iters,
                                int max_outer_iters, double damping) {
  SolverConfig cfg;
  cfg.tol_kl = tol_kl;
  cfg.tol_fixed_point = tol_fixed_point;
  cfg.max_inner_iters = max_inner_iters;
  cfg.max_outer_iters = max_outer_iters;
  cfg.damping = damping;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "MMSE bounds and minimax-robust estimation over KL uncertainty balls";

  py::register_exception<NonConvergent>(m, "NonConvergent", PyExc_RuntimeError);
  py::register_exception<InfeasibleAlpha>(m, "InfeasibleAlpha", PyExc_RuntimeError);

  py::class_<SaddleSolution>(m, "SaddleSolution")
      .def_readonly("alpha", &SaddleSolution::alpha)
      .def_property_readonly("sigma_x",
                             [](const SaddleSolution& s) { return s.sigma_x.matrix(); })
      .def_property_readonly("branch",
                             [](const SaddleSolution& s) {
                               return s.branch == Branch::Sup ? "sup" : "inf";
                             })
      .def_readonly("kl_achieved", &SaddleSolution::kl_achieved)
      .def_readonly("fixed_point_residual", &SaddleSolution::fixed_point_residual)
      .def_readonly("alt_residual", &SaddleSolution::alt_residual)
      .def_readonly("iterations", &SaddleSolution::iterations);

  py::class_<McEstimate>(m, "McEstimate")
      .def_readonly("mean", &McEstimate::mean)
      .def_readonly("std_error", &McEstimate::std_error)
      .def_readonly("samples", &McEstimate::samples);

  m.def("toeplitz_exp_cov",
        [](int dim, double rate) { return toeplitz_exp_cov(dim, rate).matrix(); },
        py::arg("dim"), py::arg("rate"),
        "Exponentially decaying Toeplitz covariance with entries exp(-rate*|i-j|).");

  m.def("channel_operators",
        [](const Matrix& sigma_x, const Matrix& sigma_n) {
          const ChannelOperators ops = channel_operators(SpdMatrix(sigma_x), SpdMatrix(sigma_n));
          return py::make_tuple(ops.w_x, ops.w_n, ops.d_x, ops.d_n);
        },
        py::arg("sigma_x"), py::arg("sigma_n"), "Returns (w_x, w_n, d_x, d_n).");

  m.def("mmse_gaussian",
        [](const Matrix& sigma_x, const Matrix& sigma_n) {
          return mmse_gaussian(SpdMatrix(sigma_x), SpdMatrix(sigma_n));
        },
        py::arg("sigma_x"), py::arg("sigma_n"));

  m.def("mmse_estimator",
        [](const Vector& mean, const Matrix& cov, const Matrix& sigma_n) {
          const LinearEstimator est = mmse_estimator(make_gaussian(mean, cov), SpdMatrix(sigma_n));
          return py::make_tuple(est.gain, est.anchor_mean);
        },
        py::arg("mean"), py::arg("cov"), py::arg("sigma_n"),
        "Returns (gain, anchor_mean) of the Bayes estimator.");

  m.def("apply_estimator",
        [](const Matrix& gain, const Vector& anchor_mean, const Vector& y) {
          return apply_estimator(LinearEstimator(gain, anchor_mean), y);
        },
        py::arg("gain"), py::arg("anchor_mean"), py::arg("y"));

  m.def("kl_gaussian",
        [](const Vector& mean_p, const Matrix& cov_p, const Vector& mean_q, const Matrix& cov_q) {
          return kl_gaussian(make_gaussian(mean_p, cov_p), make_gaussian(mean_q, cov_q));
        },
        py::arg("mean_p"), py::arg("cov_p"), py::arg("mean_q"), py::arg("cov_q"));

  m.def("mse_linear_under_gaussian",
        [](const Matrix& gain, const Vector& anchor_mean, const Vector& mean, const Matrix& cov,
           const Matrix& sigma_n) {
          return mse_linear_under_gaussian(LinearEstimator(gain, anchor_mean),
                                           make_gaussian(mean, cov), SpdMatrix(sigma_n));
        },
        py::arg("gain"), py::arg("anchor_mean"), py::arg("mean"), py::arg("cov"),
        py::arg("sigma_n"));

  m.def("reduce_observations",
        [](const Matrix& sigma_n, const std::vector<Vector>& observations) {
          auto [cov, mean] = reduce_observations(SpdMatrix(sigma_n), observations);
          return py::make_tuple(cov.matrix(), mean);
        },
        py::arg("sigma_n"), py::arg("observations"));

  m.def("solve_saddle",
        [](const Vector& mean, const Matrix& cov, const Matrix& sigma_n, double epsilon,
           const std::string& branch, double tol_kl, double tol_fixed_point, int max_inner_iters,
           int max_outer_iters, double damping) {
          const KlBall ball(make_gaussian(mean, cov), epsilon);
          return solve_saddle(ball, SpdMatrix(sigma_n), branch_from_string(branch),
                              config_from_kwargs(tol_kl, tol_fixed_point, max_inner_iters,
                                                 max_outer_iters, damping));
        },
        py::arg("mean"), py::arg("cov"), py::arg("sigma_n"), py::arg("epsilon"),
        py::arg("branch"), py::arg("tol_kl") = 1e-10, py::arg("tol_fixed_point") = 1e-12,
        py::arg("max_inner_iters") = 500, py::arg("max_outer_iters") = 200,
        py::arg("damping") = 1.0);

  m.def("mmse_bounds",
        [](const Vector& mean, const Matrix& cov, const Matrix& sigma_n, double epsilon) {
          return mmse_bounds(KlBall(make_gaussian(mean, cov), epsilon), SpdMatrix(sigma_n));
        },
        py::arg("mean"), py::arg("cov"), py::arg("sigma_n"), py::arg("epsilon"),
        "Returns (lower, upper).");

  m.def("robust_estimator",
        [](const Vector& mean, const Matrix& cov, const Matrix& sigma_n, double epsilon) {
          auto [est, sol] =
              robust_estimator(KlBall(make_gaussian(mean, cov), epsilon), SpdMatrix(sigma_n));
          return py::make_tuple(est.gain, est.anchor_mean, sol);
        },
        py::arg("mean"), py::arg("cov"), py::arg("sigma_n"), py::arg("epsilon"),
        "Returns (gain, anchor_mean, solution).");

  m.def("least_favorable_vs_nominal",
        [](const Vector& mean, const Matrix& cov, const Matrix& sigma_n, double epsilon) {
          const GaussianDist lfd = least_favorable_vs_nominal(
              KlBall(make_gaussian(mean, cov), epsilon), SpdMatrix(sigma_n));
          return py::make_tuple(lfd.mean, lfd.cov.matrix());
        },
        py::arg("mean"), py::arg("cov"), py::arg("sigma_n"), py::arg("epsilon"),
        "Returns (mean, cov) of the least favorable prior for the nominal estimator.");

  m.def("sample_in_ball_gaussians",
        [](const Vector& mean, const Matrix& cov, double epsilon, int count, std::uint64_t seed) {
          const auto dists =
              sample_in_ball_gaussians(KlBall(make_gaussian(mean, cov), epsilon), count, seed);
          py::list out;
          for (const auto& d : dists) out.append(py::make_tuple(d.mean, d.cov.matrix()));
          return out;
        },
        py::arg("mean"), py::arg("cov"), py::arg("epsilon"), py::arg("count"), py::arg("seed"));

  m.def("alt_optimality_residual",
        [](const Matrix& sigma_x, const Matrix& sigma_0, const Matrix& sigma_n, double alpha) {
          return alt_optimality_residual(SpdMatrix(sigma_x), SpdMatrix(sigma_0),
                                         SpdMatrix(sigma_n), alpha);
        },
        py::arg("sigma_x"), py::arg("sigma_0"), py::arg("sigma_n"), py::arg("alpha"));

  m.def("lambert_w",
        [](int branch, double x) {
          if (branch != 0 && branch != -1) {
            throw std::invalid_argument("lambert_w: branch must be 0 or -1");
          }
          return lambert_w(branch == 0 ? LambertBranch::Principal : LambertBranch::MinusOne, x);
        },
        py::arg("branch"), py::arg("x"));

  m.def("white_variances",
        [](int dim, double sigma0_sq, double sigmaN_sq, double epsilon) {
          return white_variances(WhiteInstance(dim, sigma0_sq, sigmaN_sq, epsilon));
        },
        py::arg("dim"), py::arg("sigma0_sq"), py::arg("sigmaN_sq"), py::arg("epsilon"),
        "Returns (s_inf, s_sup).");

  m.def("white_bounds",
        [](int dim, double sigma0_sq, double sigmaN_sq, double epsilon) {
          return white_bounds(WhiteInstance(dim, sigma0_sq, sigmaN_sq, epsilon));
        },
        py::arg("dim"), py::arg("sigma0_sq"), py::arg("sigmaN_sq"), py::arg("epsilon"),
        "Returns (lower, upper).");

  m.def("gamma_fn", &gamma_fn, py::arg("x"));
  m.def("gg_from_power",
        [](double shape, double b_sq) { return gg_from_power(shape, b_sq).scale; },
        py::arg("shape"), py::arg("b_sq"), "Scale a with E[X^2] = b_sq.");
  m.def("gg_density",
        [](double scale, double shape, double x) {
          return gg_density(GeneralizedGaussian(scale, shape), x);
        },
        py::arg("scale"), py::arg("shape"), py::arg("x"));
  m.def("gg_fisher_information",
        [](double scale, double shape) {
          return gg_fisher_information(GeneralizedGaussian(scale, shape));
        },
        py::arg("scale"), py::arg("shape"));
  m.def("bayesian_crb",
        [](double scale, double shape, double snr) {
          return bayesian_crb(GeneralizedGaussian(scale, shape), ScaledChannel(snr));
        },
        py::arg("scale"), py::arg("shape"), py::arg("snr"));
  m.def("gg_kl_to_gaussian", &gg_kl_to_gaussian, py::arg("shape"));
  m.def("gg_kl_mmse_bounds",
        [](double scale, double shape, double snr) {
          return gg_kl_mmse_bounds(GeneralizedGaussian(scale, shape), ScaledChannel(snr));
        },
        py::arg("scale"), py::arg("shape"), py::arg("snr"), "Returns (lower, upper).");

  m.def("sample_gaussian",
        [](const Vector& mean, const Matrix& cov, std::int64_t count, std::uint64_t seed) {
          return sample_gaussian(make_gaussian(mean, cov), count, seed);
        },
        py::arg("mean"), py::arg("cov"), py::arg("count"), py::arg("seed"));

  m.def("mc_mse",
        [](const Matrix& gain, const Vector& anchor_mean, const Vector& mean, const Matrix& cov,
           const Matrix& sigma_n, std::int64_t samples, std::uint64_t seed) {
          return mc_mse(LinearEstimator(gain, anchor_mean), make_gaussian(mean, cov),
                        SpdMatrix(sigma_n), McConfig(samples, seed));
        },
        py::arg("gain"), py::arg("anchor_mean"), py::arg("mean"), py::arg("cov"),
        py::arg("sigma_n"), py::arg("samples"), py::arg("seed"));

  m.def("mc_verify_bounds",
        [](const Vector& mean, const Matrix& cov, const Matrix& sigma_n, double epsilon,
           std::int64_t samples, int trials, std::uint64_t seed) {
          const auto report = mc_verify_bounds(KlBall(make_gaussian(mean, cov), epsilon),
                                               SpdMatrix(sigma_n), McConfig(samples, seed),
                                               trials, seed);
          py::dict out;
          out["trials"] = report.trials;
          out["violations"] = report.violations;
          out["worst_margin"] = report.worst_margin;
          return out;
        },
        py::arg("mean"), py::arg("cov"), py::arg("sigma_n"), py::arg("epsilon"),
        py::arg("samples"), py::arg("trials"), py::arg("seed"));

#ifdef VERSION_INFO
#define KLMMSE_STR2(x) #x
#define KLMMSE_STR(x) KLMMSE_STR2(x)
  m.attr("__version__") = KLMMSE_STR(VERSION_INFO);
#else
  m.attr("__version__") = "dev";
#endif
}
