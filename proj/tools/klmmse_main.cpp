#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "klmmse/gg.hpp"
#include "klmmse/json_io.hpp"
#include "klmmse/monte_carlo.hpp"
#include "klmmse/rng.hpp"
#include "klmmse/saddle.hpp"
#include "klmmse/sweeps.hpp"

namespace {

using klmmse::Json;
using klmmse::Matrix;
using klmmse::Vector;

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kSolverError = 3,
  kValidationError = 4,
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int log_level() {
  const char* env = std::getenv("KLMMSE_LOG");
  if (env == nullptr) return 0;
  const std::string v(env);
  if (v == "debug") return 2;
  if (v == "info") return 1;
  return 0;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[klmmse] " << msg << "\n";
}

Json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

klmmse::SpdMatrix covariance_from_config(const Json& j, const char* field) {
  try {
    if (j.contains("toeplitz")) {
      const Json& t = j.at("toeplitz");
      return klmmse::toeplitz_exp_cov(t.at("dim").get<int>(), t.at("rate").get<double>());
    }
    if (j.contains("white")) {
      const Json& w = j.at("white");
      const int dim = w.at("dim").get<int>();
      const double variance = w.at("variance").get<double>();
      return klmmse::SpdMatrix(variance * Matrix::Identity(dim, dim));
    }
    return klmmse::SpdMatrix(klmmse::matrix_from_json(j));
  } catch (const Json::exception& e) {
    throw ConfigError(std::string(field) + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string(field) + ": " + e.what());
  }
}

klmmse::SolverConfig solver_from_config(const Json& cfg) {
  klmmse::SolverConfig sc;
  if (!cfg.contains("solver")) return sc;
  const Json& s = cfg.at("solver");
  try {
    sc.tol_kl = s.value("tol_kl", sc.tol_kl);
    sc.tol_fixed_point = s.value("tol_fixed_point", sc.tol_fixed_point);
    sc.max_inner_iters = s.value("max_inner_iters", sc.max_inner_iters);
    sc.max_outer_iters = s.value("max_outer_iters", sc.max_outer_iters);
    sc.damping = s.value("damping", sc.damping);
    sc.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }
  return sc;
}

klmmse::GaussianDist nominal_from_config(const Json& cfg, const Json& default_sigma0) {
  klmmse::SpdMatrix sigma0 =
      covariance_from_config(cfg.contains("sigma_0") ? cfg.at("sigma_0") : default_sigma0,
                             "sigma_0");
  Vector mu0 = Vector::Zero(sigma0.dim());
  if (cfg.contains("mu_0")) {
    try {
      mu0 = klmmse::vector_from_json(cfg.at("mu_0"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("mu_0: ") + e.what());
    }
    if (mu0.size() != sigma0.dim()) throw ConfigError("mu_0: length does not match sigma_0");
  }
  return klmmse::GaussianDist(std::move(mu0), std::move(sigma0));
}

std::vector<double> grid_from_config(const Json& j, const char* field, bool log_spaced) {
  try {
    if (j.contains("values")) {
      auto grid = j.at("values").get<std::vector<double>>();
      if (grid.empty()) throw ConfigError(std::string(field) + ": empty grid");
      for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
          throw ConfigError(std::string(field) + ": grid must be strictly increasing");
        }
      }
      return grid;
    }
    if (log_spaced) {
      return klmmse::grid_log_spaced(j.at("start").get<double>(), j.at("stop").get<double>(),
                                     j.at("points").get<int>());
    }
    return klmmse::grid_from_step(j.at("start").get<double>(), j.at("stop").get<double>(),
                                  j.at("step").get<double>());
  } catch (const Json::exception& e) {
    throw ConfigError(std::string(field) + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string(field) + ": " + e.what());
  }
}

void write_output(const std::string& out_path, const std::string& payload) {
  if (out_path == "-") {
    std::cout << payload;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw ConfigError("cannot open output file: " + out_path);
  out << payload;
}

Json robustness_rows_json(const std::vector<klmmse::RobustnessRow>& rows,
                          const std::string& x_name) {
  Json arr = Json::array();
  for (const auto& r : rows) {
    arr.push_back(Json{{x_name, r.x},
                       {"mse_f0_nominal", r.mse_f0_nominal},
                       {"mse_f0_lfd", r.mse_f0_lfd},
                       {"mse_fstar_nominal", r.mse_fstar_nominal},
                       {"mse_fstar_lfd", r.mse_fstar_lfd}});
  }
  return arr;
}

const Json kDefaultToeplitz = Json{{"toeplitz", {{"dim", 10}, {"rate", 0.9}}}};

int cmd_bounds(const std::string& config_path, const std::string& out_path,
               const std::string& format) {
  if (format == "csv") throw ConfigError("bounds: only --format json is supported");
  const Json cfg = load_config(config_path);
  if (!cfg.contains("sigma_n")) throw ConfigError("bounds: missing sigma_n");
  if (!cfg.contains("epsilon")) throw ConfigError("bounds: missing epsilon");
  klmmse::GaussianDist nominal = nominal_from_config(cfg, kDefaultToeplitz);
  const klmmse::SpdMatrix sigma_n = covariance_from_config(cfg.at("sigma_n"), "sigma_n");
  const double epsilon = cfg.at("epsilon").get<double>();
  if (!(epsilon >= 0.0)) throw ConfigError("bounds: epsilon must be >= 0");
  if (sigma_n.dim() != nominal.dim()) throw ConfigError("bounds: sigma_n dimension mismatch");
  const klmmse::SolverConfig sc = solver_from_config(cfg);

  const double nominal_mmse = klmmse::mmse_gaussian(nominal.cov, sigma_n);
  const klmmse::KlBall ball(nominal, epsilon);
  const klmmse::SaddleSolution sup = klmmse::solve_saddle(ball, sigma_n, klmmse::Branch::Sup, sc);
  const klmmse::SaddleSolution inf = klmmse::solve_saddle(ball, sigma_n, klmmse::Branch::Inf, sc);

  Json out{{"lower", klmmse::mmse_gaussian(inf.sigma_x, sigma_n)},
           {"upper", klmmse::mmse_gaussian(sup.sigma_x, sigma_n)},
           {"nominal", nominal_mmse},
           {"alpha_sup", sup.alpha},
           {"alpha_inf", inf.alpha},
           {"sigma_x_sup", klmmse::matrix_to_json(sup.sigma_x.matrix())},
           {"sigma_x_inf", klmmse::matrix_to_json(inf.sigma_x.matrix())},
           {"residuals",
            Json{{"sup", Json{{"residual_eq3", sup.fixed_point_residual},
                              {"residual_eq9", sup.alt_residual},
                              {"kl_achieved", sup.kl_achieved}}},
                 {"inf", Json{{"residual_eq3", inf.fixed_point_residual},
                              {"residual_eq9", inf.alt_residual},
                              {"kl_achieved", inf.kl_achieved}}}}}};
  write_output(out_path, out.dump(2) + "\n");
  return kOk;
}

int cmd_sweep_snr(const std::string& config_path, const std::string& out_path,
                  const std::string& format, int threads) {
  const Json cfg = config_path.empty() ? Json::object() : load_config(config_path);
  klmmse::GaussianDist nominal = nominal_from_config(cfg, kDefaultToeplitz);
  const double epsilon = cfg.value("epsilon", 2.0);
  const std::vector<double> grid =
      cfg.contains("snr_db")
          ? grid_from_config(cfg.at("snr_db"), "snr_db", false)
          : klmmse::grid_from_step(-10.0, 20.0, 1.0);
  const klmmse::SolverConfig sc = solver_from_config(cfg);
  log_info("sweep-snr over " + std::to_string(grid.size()) + " grid points");
  const auto rows = klmmse::sweep_snr(nominal, epsilon, grid, sc, threads);
  write_output(out_path, format == "json" ? robustness_rows_json(rows, "snr_db").dump(2) + "\n"
                                          : klmmse::robustness_csv(rows, "snr_db"));
  return kOk;
}

int cmd_sweep_eps(const std::string& config_path, const std::string& out_path,
                  const std::string& format, int threads) {
  const Json cfg = config_path.empty() ? Json::object() : load_config(config_path);
  klmmse::GaussianDist nominal = nominal_from_config(cfg, kDefaultToeplitz);
  const double snr_db = cfg.value("snr_db", 0.0);
  const std::vector<double> grid =
      cfg.contains("epsilon")
          ? grid_from_config(cfg.at("epsilon"), "epsilon", false)
          : klmmse::grid_from_step(0.0, 4.0, 0.1);
  const klmmse::SolverConfig sc = solver_from_config(cfg);
  log_info("sweep-eps over " + std::to_string(grid.size()) + " grid points");
  const auto rows = klmmse::sweep_eps(nominal, snr_db, grid, sc, threads);
  write_output(out_path, format == "json" ? robustness_rows_json(rows, "epsilon").dump(2) + "\n"
                                          : klmmse::robustness_csv(rows, "epsilon"));
  return kOk;
}

int cmd_gg_bounds(const std::string& config_path, const std::string& out_path,
                  const std::string& format, int threads) {
  const Json cfg = config_path.empty() ? Json::object() : load_config(config_path);
  const double snr_db = cfg.value("snr_db", 5.0);
  const double power = cfg.value("power", 1.0);
  if (!(power > 0.0)) throw ConfigError("gg-bounds: power must be > 0");
  const std::vector<double> grid = cfg.contains("p")
                                       ? grid_from_config(cfg.at("p"), "p", true)
                                       : klmmse::grid_log_spaced(0.3, 8.0, 60);
  const auto rows = klmmse::sweep_gg(snr_db, power, grid, threads);
  if (format == "json") {
    Json arr = Json::array();
    for (const auto& r : rows) {
      arr.push_back(Json{{"p", r.p},
                         {"crb", r.crb},
                         {"kl_lower", r.kl_lower},
                         {"kl_upper", r.kl_upper},
                         {"d_kl", r.d_kl}});
    }
    write_output(out_path, arr.dump(2) + "\n");
  } else {
    write_output(out_path, klmmse::gg_csv(rows));
  }
  return kOk;
}

int cmd_validate(const std::string& config_path, const std::string& out_path,
                 const std::string& format) {
  if (format == "csv") throw ConfigError("validate: only --format json is supported");
  const Json cfg = config_path.empty() ? Json::object() : load_config(config_path);
  const Json default_sigma0{{"white", {{"dim", 1}, {"variance", 1.0}}}};
  klmmse::GaussianDist nominal = nominal_from_config(cfg, default_sigma0);
  klmmse::SpdMatrix sigma_n =
      cfg.contains("sigma_n")
          ? covariance_from_config(cfg.at("sigma_n"), "sigma_n")
          : klmmse::SpdMatrix(Matrix::Identity(nominal.dim(), nominal.dim()));
  if (sigma_n.dim() != nominal.dim()) throw ConfigError("validate: sigma_n dimension mismatch");
  const double epsilon = cfg.value("epsilon", 0.5);
  if (!(epsilon >= 0.0)) throw ConfigError("validate: epsilon must be >= 0");
  const auto seed = cfg.value("seed", std::uint64_t{20250810});
  const auto samples = cfg.value("samples", std::int64_t{200000});
  const int trials = cfg.value("trials", 50);
  if (samples < 1 || trials < 1) throw ConfigError("validate: samples and trials must be >= 1");

  const klmmse::KlBall ball(nominal, epsilon);
  log_info("validate: " + std::to_string(trials) + " trials x " + std::to_string(samples) +
           " samples");
  const klmmse::BoundsValidationReport report =
      klmmse::mc_verify_bounds(ball, sigma_n, klmmse::McConfig(samples, seed), trials, seed);

  // The same deterministic in-ball priors, for analytic-vs-MC deltas.
  const auto priors =
      klmmse::sample_in_ball_gaussians(ball, trials, klmmse::derive_seed(seed, 1000));
  Json deltas = Json::array();
  for (int t = 0; t < trials; ++t) {
    const auto& q = priors[static_cast<std::size_t>(t)];
    const double analytic = klmmse::mmse_gaussian(q.cov, sigma_n);
    const auto& r = report.results[static_cast<std::size_t>(t)];
    const double delta_se =
        r.std_error > 0.0 ? (r.mmse_estimate - analytic) / r.std_error : 0.0;
    deltas.push_back(Json{{"analytic", analytic},
                          {"mc", r.mmse_estimate},
                          {"std_error", r.std_error},
                          {"delta_in_se", delta_se}});
  }

  const auto [lower, upper] = klmmse::mmse_bounds(ball, sigma_n);
  Json out = klmmse::report_to_json(report);
  out["lower"] = lower;
  out["upper"] = upper;
  out["nominal"] = klmmse::mmse_gaussian(nominal.cov, sigma_n);
  out["analytic_vs_mc"] = std::move(deltas);
  write_output(out_path, out.dump(2) + "\n");
  return report.violations == 0 ? kOk : kValidationError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MMSE bounds and minimax-robust estimation over KL uncertainty balls"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_path = "-", format;
  int threads = 1;
  app.add_option("--config", config_path, "JSON config file")->expected(1);
  app.add_option("--out", out_path, "output path or - for stdout");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json", ""}));
  app.add_option("--threads", threads, "worker threads for sweeps")->check(CLI::PositiveNumber);

  auto* bounds = app.add_subcommand("bounds", "lower/upper MMSE bounds for one instance");
  auto* sweep_snr = app.add_subcommand("sweep-snr", "robustness curves vs SNR");
  auto* sweep_eps = app.add_subcommand("sweep-eps", "robustness curves vs the KL radius");
  auto* gg_bounds = app.add_subcommand("gg-bounds",
                                       "KL bounds vs CRB for generalized Gaussian inputs");
  auto* validate = app.add_subcommand("validate", "Monte-Carlo check of the analytic bounds");

  CLI11_PARSE(app, argc, argv);

  try {
    if (bounds->parsed()) {
      if (config_path.empty()) throw ConfigError("bounds: --config is required");
      return cmd_bounds(config_path, out_path, format.empty() ? "json" : format);
    }
    if (sweep_snr->parsed()) {
      return cmd_sweep_snr(config_path, out_path, format.empty() ? "csv" : format, threads);
    }
    if (sweep_eps->parsed()) {
      return cmd_sweep_eps(config_path, out_path, format.empty() ? "csv" : format, threads);
    }
    if (gg_bounds->parsed()) {
      return cmd_gg_bounds(config_path, out_path, format.empty() ? "csv" : format, threads);
    }
    if (validate->parsed()) {
      return cmd_validate(config_path, out_path, format.empty() ? "json" : format);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const klmmse::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kSolverError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kOk;
}
