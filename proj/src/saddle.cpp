#include "klmmse/saddle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "klmmse/rng.hpp"
#include "klmmse/root_finding.hpp"

namespace klmmse {

namespace {

constexpr int kAndersonMemory = 5;

double sign_of(Branch b) { return b == Branch::Sup ? 1.0 : -1.0; }

// Wn(S)^T Wn(S) = (S+Sn)^{-1} Sn^2 (S+Sn)^{-1}, always positive definite.
Matrix self_consistency_matrix(const Matrix& s, const SpdMatrix& sigma_n) {
  Eigen::LLT<Matrix> llt(symmetrized(s + sigma_n.matrix()));
  const Matrix vsn = llt.solve(sigma_n.matrix());  // (S+Sn)^{-1} Sn
  return symmetrized(vsn * vsn.transpose());
}

double kl_of_cov(const Matrix& sx, const SpdMatrix& sigma_0) {
  const int k = sigma_0.dim();
  const Matrix ratio = sigma_0.solve(sx);
  Eigen::LLT<Matrix> llt(symmetrized(sx));
  const double log_det_sx = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return 0.5 * (ratio.trace() - k - (log_det_sx - sigma_0.log_det()));
}

struct FrozenResult {
  double alpha;
  Matrix sigma;  // symmetric positive definite by construction
};

// Eliminates the multiplier exactly for a frozen coefficient matrix m:
// finds alpha on the requested side with KL(Sx(alpha)) = eps along
// Sx(alpha) = (S0^{-1} - alpha m)^{-1}. Reduces to a scalar monotone
// root-find in the eigenbasis of S0^{1/2} m S0^{1/2}.
FrozenResult frozen_kl_match(const Matrix& sqrt_s0, const Matrix& m, double eps, Branch branch) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(sqrt_s0 * m * sqrt_s0));
  if (es.info() != Eigen::Success) throw SolverError("frozen_kl_match: eigendecomposition failed");
  const Vector d = es.eigenvalues().cwiseMax(0.0);
  const double d_max = d.maxCoeff();
  if (!(d_max > 0.0)) {
    throw InfeasibleAlpha("frozen_kl_match: degenerate coefficient matrix, KL unreachable");
  }

  const auto kl_alpha = [&](double a) {
    double acc = 0.0;
    for (int i = 0; i < d.size(); ++i) {
      const double r = 1.0 / (1.0 - a * d[i]);
      acc += r - 1.0 - std::log(r);
    }
    return 0.5 * acc;
  };

  double lo, hi;
  if (branch == Branch::Sup) {
    // KL diverges at the positive-definiteness limit 1/d_max.
    lo = 0.0;
    hi = (1.0 - 1e-12) / d_max;
    if (kl_alpha(hi) < eps) {
      std::ostringstream msg;
      msg << "frozen_kl_match: KL " << kl_alpha(hi) << " at the feasibility limit alpha=" << hi
          << " is below the requested " << eps;
      throw InfeasibleAlpha(msg.str());
    }
  } else {
    double a = -1.0 / d_max;
    int guard = 0;
    while (kl_alpha(a) < eps) {
      a *= 2.0;
      if (++guard > 4000) throw InfeasibleAlpha("frozen_kl_match: KL never reached on inf side");
    }
    lo = a;
    hi = 0.0;
  }

  const RootResult root =
      brent_root([&](double a) { return kl_alpha(a) - eps; }, lo, hi, /*ftol=*/0.0,
                 /*xtol=*/0.0, /*max_iter=*/300);
  const double alpha = root.x;

  Vector r(d.size());
  for (int i = 0; i < d.size(); ++i) r[i] = 1.0 / (1.0 - alpha * d[i]);
  const Matrix basis = sqrt_s0 * es.eigenvectors();
  return {alpha, symmetrized(basis * r.asDiagonal() * basis.transpose())};
}

// Symmetric-basis index helpers for the Newton system.
struct SymBasis {
  explicit SymBasis(int k) : k(k) {
    for (int i = 0; i < k; ++i)
      for (int j = i; j < k; ++j) pairs.emplace_back(i, j);
  }
  int k;
  std::vector<std::pair<int, int>> pairs;
  int size() const { return static_cast<int>(pairs.size()); }
};

struct NewtonState {
  Matrix sigma;
  double alpha;
  int iterations;
  bool converged;
};

// Damped Newton on the joint system, written in covariance units so the
// linearization stays well conditioned when the covariance has small
// eigenvalues:
//   R(S, a) = A(S, a)^{-1} - S = 0  with  A = S0^{-1} - a M(S),
//   KL(S) - eps = 0.
// The KL gradient uses S^{-1} = A, exact at the solution. The joint Jacobian
// stays regular along the solution path even where alpha folds as a function
// of the KL level, which is what defeats nested single-variable schemes.
NewtonState newton_polish(const SpdMatrix& sigma_0, const Matrix& s0_inv,
                          const SpdMatrix& sigma_n, double eps, Matrix s, double alpha,
                          double tol_rel, double tol_kl, int max_iters) {
  const int k = sigma_0.dim();
  const SymBasis basis(k);
  const int ns = basis.size();

  struct Eval {
    Matrix r, a_inv, v, m;
    double kl_gap = 0.0, norm = 0.0;
    bool valid = false;
  };
  const auto evaluate = [&](const Matrix& sx, double a) -> Eval {
    Eval e;
    Eigen::LLT<Matrix> llt_v(symmetrized(sx + sigma_n.matrix()));
    if (llt_v.info() != Eigen::Success) return e;
    e.v = llt_v.solve(Matrix::Identity(k, k));
    e.m = symmetrized(e.v * sigma_n.matrix() * sigma_n.matrix() * e.v);
    Eigen::LLT<Matrix> llt_a(symmetrized(s0_inv - a * e.m));
    if (llt_a.info() != Eigen::Success) return e;
    e.a_inv = symmetrized(llt_a.solve(Matrix::Identity(k, k)));
    e.r = e.a_inv - sx;
    e.kl_gap = kl_of_cov(sx, sigma_0) - eps;
    const double scale = std::max(1.0, sx.norm());
    e.norm = std::sqrt(e.r.squaredNorm() / (scale * scale) + e.kl_gap * e.kl_gap);
    e.valid = true;
    return e;
  };

  Eval cur = evaluate(s, alpha);
  if (!cur.valid) return {std::move(s), alpha, 0, false};
  for (int it = 0; it < max_iters; ++it) {
    if (cur.r.norm() <= tol_rel * s.norm() && std::abs(cur.kl_gap) <= tol_kl) {
      return {std::move(s), alpha, it, true};
    }
    // Columns of the Jacobian via the rank-2 structure of each basis element:
    // dR[B] = -a Ai (V B M + M B V) Ai - B, with Ai = A^{-1}.
    const Matrix av = cur.a_inv * cur.v;   // Ai V
    const Matrix am = cur.a_inv * cur.m;   // Ai M
    Matrix jac(ns + 1, ns + 1);
    Vector rhs(ns + 1);
    for (int c = 0; c < ns; ++c) {
      const auto [i, j] = basis.pairs[c];
      Matrix sandwich = av.col(i) * am.col(j).transpose() + av.col(j) * am.col(i).transpose();
      sandwich += sandwich.transpose().eval();
      if (i == j) sandwich *= 0.5;
      Matrix dr = -alpha * sandwich;
      dr(i, j) -= 1.0;
      if (i != j) dr(j, i) -= 1.0;
      for (int c2 = 0; c2 < ns; ++c2) {
        const auto [a2, b2] = basis.pairs[c2];
        jac(c2, c) = dr(a2, b2);
      }
      // d(KL)/dS with S^{-1} ~= A: 0.5*tr((S0^{-1} - A) B) = 0.5*a*tr(M B)
      jac(ns, c) = (i == j) ? 0.5 * alpha * cur.m(i, i) : alpha * cur.m(i, j);
    }
    const Matrix dr_alpha = am * cur.a_inv;  // Ai M Ai
    for (int c2 = 0; c2 < ns; ++c2) {
      const auto [a2, b2] = basis.pairs[c2];
      jac(c2, ns) = dr_alpha(a2, b2);
      rhs[c2] = -cur.r(a2, b2);
    }
    jac(ns, ns) = 0.0;
    rhs[ns] = -cur.kl_gap;

    Eigen::ColPivHouseholderQR<Matrix> qr(jac);
    const Vector dx = qr.solve(rhs);
    if (!dx.allFinite()) return {std::move(s), alpha, it, false};

    Matrix ds = Matrix::Zero(k, k);
    for (int c = 0; c < ns; ++c) {
      const auto [i, j] = basis.pairs[c];
      ds(i, j) = dx[c];
      ds(j, i) = dx[c];
    }
    const double da = dx[ns];

    double step = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      const Matrix s_try = symmetrized(s + step * ds);
      const double a_try = alpha + step * da;
      if (is_positive_definite(s_try)) {
        Eval next = evaluate(s_try, a_try);
        if (next.valid && next.norm < (1.0 - 1e-4 * step) * cur.norm) {
          s = s_try;
          alpha = a_try;
          cur = std::move(next);
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) return {std::move(s), alpha, it, false};
  }
  const bool ok = cur.r.norm() <= tol_rel * s.norm() && std::abs(cur.kl_gap) <= tol_kl;
  return {std::move(s), alpha, max_iters, ok};
}

struct RungResult {
  Matrix sigma;
  double alpha;
  int iterations;
  bool converged;
};

// One continuation rung: Anderson-accelerated self-consistency iteration on
// Phi(S) = frozen_kl_match(M(S)). When the acceleration stops making clear
// progress a Newton attempt on the joint system is made; near folds of the
// solution manifold Newton's step degenerates, so on failure the iteration
// resumes from its best point instead of giving up the rung.
RungResult solve_rung(const SpdMatrix& sigma_0, const Matrix& s0_inv, const Matrix& sqrt_s0,
                      const SpdMatrix& sigma_n, double eps, Branch branch, Matrix s,
                      const SolverConfig& cfg) {
  const double mixing = 0.5 * cfg.damping;
  const double tol_kl_inner = std::max(0.5 * cfg.tol_kl, 1e-13 * std::max(1.0, eps));
  int used = 0;

  std::deque<Vector> xs, rs;
  const auto flat = [](const Matrix& m) { return Vector(Eigen::Map<const Vector>(m.data(), m.size())); };

  Matrix best_sigma = s;
  double best_alpha = 0.0;
  double best_res = std::numeric_limits<double>::infinity();
  double window_res = std::numeric_limits<double>::infinity();
  int next_check = 16;

  for (int t = 0; used < cfg.max_inner_iters; ++t) {
    ++used;
    FrozenResult fr = frozen_kl_match(sqrt_s0, self_consistency_matrix(s, sigma_n), eps, branch);
    const Matrix residual_mat = fr.sigma - s;
    const double res = residual_mat.norm() / s.norm();
    if (res < best_res) {
      best_res = res;
      best_sigma = fr.sigma;
      best_alpha = fr.alpha;
    }
    if (res <= cfg.tol_fixed_point) {
      return {std::move(fr.sigma), fr.alpha, used, true};
    }
    if (t >= next_check) {
      const bool stalled = res > 0.25 * window_res;
      window_res = res;
      next_check = t + 16;
      if (stalled) {
        const int newton_budget = std::min(60, cfg.max_inner_iters - used);
        if (newton_budget < 5) break;
        NewtonState ns =
            newton_polish(sigma_0, s0_inv, sigma_n, eps, best_sigma, best_alpha,
                          cfg.tol_fixed_point, tol_kl_inner, newton_budget);
        used += std::max(1, ns.iterations);
        if (ns.converged) {
          return {std::move(ns.sigma), ns.alpha, used, true};
        }
        // resume the accelerated iteration from the most recent best point
        s = best_sigma;
        xs.clear();
        rs.clear();
        next_check = t + 32;
        continue;
      }
    }

    xs.push_back(flat(s));
    rs.push_back(flat(residual_mat));
    Matrix next;
    bool have_next = false;
    if (xs.size() >= 2) {
      const int m = std::min<int>(kAndersonMemory, static_cast<int>(xs.size()) - 1);
      Matrix dx(xs.front().size(), m), dr(xs.front().size(), m);
      const int base = static_cast<int>(xs.size()) - 1 - m;
      for (int c = 0; c < m; ++c) {
        dx.col(c) = xs[base + c + 1] - xs[base + c];
        dr.col(c) = rs[base + c + 1] - rs[base + c];
      }
      const Vector gamma = dr.colPivHouseholderQr().solve(rs.back());
      const Vector xn = xs.back() + mixing * rs.back() - (dx + mixing * dr) * gamma;
      Matrix cand = symmetrized(Eigen::Map<const Matrix>(xn.data(), s.rows(), s.cols()));
      if (is_positive_definite(cand)) {
        next = std::move(cand);
        have_next = true;
      }
    }
    if (!have_next) next = symmetrized(s + mixing * residual_mat);
    s = std::move(next);
    while (static_cast<int>(xs.size()) > kAndersonMemory + 1) {
      xs.pop_front();
      rs.pop_front();
    }
  }

  return {std::move(best_sigma), best_alpha, used, false};
}

}  // namespace

void SolverConfig::validate() const {
  if (!(tol_kl > 0.0) || !(tol_fixed_point > 0.0)) {
    throw std::invalid_argument("SolverConfig: tolerances must be positive");
  }
  if (max_inner_iters <= 0 || max_outer_iters <= 0) {
    throw std::invalid_argument("SolverConfig: iteration budgets must be positive");
  }
  if (!(damping > 0.0) || damping > 1.0) {
    throw std::invalid_argument("SolverConfig: damping must lie in (0, 1]");
  }
}

SaddleSolution solve_saddle(const KlBall& ball, const SpdMatrix& sigma_n, Branch branch,
                            const SolverConfig& cfg) {
  cfg.validate();
  const SpdMatrix& sigma_0 = ball.center.cov;
  if (sigma_0.dim() != sigma_n.dim()) {
    throw std::invalid_argument("solve_saddle: dimension mismatch");
  }
  const double eps = ball.radius;

  const auto finish = [&](Matrix s, double alpha, int iterations) {
    SpdMatrix sx(std::move(s));
    const ChannelOperators ops = channel_operators(sx, sigma_n);
    const int k = sigma_0.dim();
    const Matrix eq_gap =
        sx.matrix() - (Matrix::Identity(k, k) + alpha * ops.d_n) * sigma_0.matrix();
    const double kl = kl_gaussian(GaussianDist(ball.center.mean, sx), ball.center);
    const double alt = alt_optimality_residual(sx, sigma_0, sigma_n, alpha);
    return SaddleSolution{alpha, std::move(sx), branch, kl, eq_gap.norm(), alt, iterations};
  };

  if (eps == 0.0) {
    return finish(sigma_0.matrix(), 0.0, 0);
  }

  const Matrix s0_inv = sigma_0.inverse();
  const Matrix sqrt_s0 = sigma_0.sqrt();
  int total_iters = 0;

  // Most instances converge directly at the target radius; the continuation
  // ladder below is the globalization fallback. The two can settle on
  // different stationary families when the system has several, but every
  // solution of the optimality system attains the same optimal value.
  {
    RungResult direct = solve_rung(sigma_0, s0_inv, sqrt_s0, sigma_n, eps, branch,
                                   sigma_0.matrix(), cfg);
    total_iters += direct.iterations;
    if (direct.converged) {
      if (sign_of(branch) * direct.alpha < -1e-12) {
        throw SolverError("solve_saddle: multiplier sign inconsistent with branch");
      }
      return finish(std::move(direct.sigma), direct.alpha, total_iters);
    }
  }

  // Geometric KL ladder up to eps; adaptively split on rung failure.
  std::vector<double> ladder;
  const int rungs = std::clamp(static_cast<int>(std::ceil(std::log2(std::max(eps / 0.1, 1.0)))) + 1,
                               1, 40);
  for (int r = rungs - 1; r >= 1; --r) ladder.push_back(eps * std::pow(2.0, -r));
  ladder.push_back(eps);

  Matrix s = sigma_0.matrix();
  double alpha = 0.0;
  double reached = 0.0;
  int rung_attempts = 0;

  std::deque<double> queue(ladder.begin(), ladder.end());
  while (!queue.empty()) {
    if (++rung_attempts > cfg.max_outer_iters) {
      std::ostringstream msg;
      msg << "solve_saddle: continuation budget exhausted at KL " << reached << " of " << eps;
      throw NonConvergent(msg.str());
    }
    const double ek = queue.front();
    queue.pop_front();
    RungResult rr = solve_rung(sigma_0, s0_inv, sqrt_s0, sigma_n, ek, branch, s, cfg);
    total_iters += rr.iterations;
    if (rr.converged) {
      s = std::move(rr.sigma);
      alpha = rr.alpha;
      reached = ek;
      continue;
    }
    const double mid = 0.5 * (reached + ek);
    if (!(mid > reached * (1.0 + 1e-12)) || !(ek - mid > 1e-12 * eps)) {
      std::ostringstream msg;
      msg << "solve_saddle: stuck between KL " << reached << " and " << ek;
      throw NonConvergent(msg.str());
    }
    queue.push_front(ek);
    queue.push_front(mid);
  }

  // Sign is structural: the frozen path only visits the requested side.
  if (sign_of(branch) * alpha < -1e-12) {
    throw SolverError("solve_saddle: multiplier sign inconsistent with branch");
  }
  return finish(std::move(s), alpha, total_iters);
}

double alt_optimality_residual(const SpdMatrix& sigma_x, const SpdMatrix& sigma_0,
                               const SpdMatrix& sigma_n, double alpha) {
  const int k = sigma_x.dim();
  const Matrix id = Matrix::Identity(k, k);
  const Matrix t = id + sigma_n.solve(sigma_x.matrix());
  const Matrix lhs = t.transpose() * t * (id - sigma_0.solve(sigma_x.matrix()));
  return (lhs + alpha * sigma_x.matrix()).norm();
}

std::pair<LinearEstimator, SaddleSolution> robust_estimator(const KlBall& ball,
                                                            const SpdMatrix& sigma_n,
                                                            const SolverConfig& cfg) {
  SaddleSolution sol = solve_saddle(ball, sigma_n, Branch::Sup, cfg);
  LinearEstimator est = mmse_estimator(GaussianDist(ball.center.mean, sol.sigma_x), sigma_n);
  return {std::move(est), std::move(sol)};
}

std::pair<double, double> mmse_bounds(const KlBall& ball, const SpdMatrix& sigma_n,
                                      const SolverConfig& cfg) {
  const SaddleSolution inf_sol = solve_saddle(ball, sigma_n, Branch::Inf, cfg);
  const SaddleSolution sup_sol = solve_saddle(ball, sigma_n, Branch::Sup, cfg);
  return {mmse_gaussian(inf_sol.sigma_x, sigma_n), mmse_gaussian(sup_sol.sigma_x, sigma_n)};
}

GaussianDist least_favorable_vs_nominal(const KlBall& ball, const SpdMatrix& sigma_n,
                                        const SolverConfig& cfg) {
  cfg.validate();
  const SpdMatrix& sigma_0 = ball.center.cov;
  if (sigma_0.dim() != sigma_n.dim()) {
    throw std::invalid_argument("least_favorable_vs_nominal: dimension mismatch");
  }
  if (ball.radius == 0.0) {
    return ball.center;
  }
  // The coefficient matrix is held at the nominal covariance, so a single
  // frozen solve on the growing side is exact.
  const Matrix m0 = self_consistency_matrix(sigma_0.matrix(), sigma_n);
  FrozenResult fr = frozen_kl_match(sigma_0.sqrt(), m0, ball.radius, Branch::Sup);
  return GaussianDist(ball.center.mean, SpdMatrix(std::move(fr.sigma)));
}

std::vector<GaussianDist> sample_in_ball_gaussians(const KlBall& ball, int count,
                                                   std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_in_ball_gaussians: count must be >= 1");
  const int k = ball.center.dim();
  const Matrix sqrt_s0 = ball.center.cov.sqrt();
  const double eps = ball.radius;

  std::vector<GaussianDist> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    if (eps == 0.0) {
      out.push_back(ball.center);
      continue;
    }
    NormalStream normals(derive_seed(seed, static_cast<std::uint64_t>(i)));
    Matrix g(k, k);
    for (int c = 0; c < k; ++c)
      for (int r = 0; r < k; ++r) g(r, c) = normals.next();
    Matrix pert = symmetrized(g);
    Eigen::SelfAdjointEigenSolver<Matrix> es(pert);
    const double rho = es.eigenvalues().cwiseAbs().maxCoeff();
    if (rho > 0.0) pert /= rho;  // unit spectral radius keeps I + delta*pert PD for delta < 1

    Vector u(k);
    for (int r = 0; r < k; ++r) u[r] = normals.next();
    const Vector shift = sqrt_s0 * u / std::sqrt(static_cast<double>(k));

    // The covariance factor saturates at the positive-definiteness cap while
    // the mean shift keeps growing, so every radius is reachable.
    const double cov_cap = 0.9;
    const auto candidate = [&](double delta) {
      Matrix cov = symmetrized(
          sqrt_s0 * (Matrix::Identity(k, k) + std::min(delta, cov_cap) * pert) * sqrt_s0);
      return GaussianDist(ball.center.mean + delta * shift, SpdMatrix(std::move(cov)));
    };
    const auto kl_at = [&](double delta) { return kl_gaussian(candidate(delta), ball.center); };

    double hi = cov_cap;
    int guard = 0;
    while (kl_at(hi) < eps && ++guard < 2000) hi *= 2.0;
    // KL is strictly increasing in delta; bisect into [eps/2, eps].
    double lo = 0.0, delta = hi;
    for (int it = 0; it < 200; ++it) {
      delta = 0.5 * (lo + hi);
      const double v = kl_at(delta);
      if (v > eps) {
        hi = delta;
      } else if (v < 0.5 * eps) {
        lo = delta;
      } else {
        break;
      }
    }
    if (kl_at(delta) > eps) delta = lo;
    out.push_back(candidate(delta));
  }
  return out;
}

}  // namespace klmmse
