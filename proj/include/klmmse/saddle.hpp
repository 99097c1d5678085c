#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "klmmse/gaussian.hpp"

namespace klmmse {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Iteration budget exhausted before the optimality system was satisfied.
struct NonConvergent : SolverError {
  using SolverError::SolverError;
};

/// No multiplier on the requested side keeps the covariance positive
/// definite while meeting the KL constraint. Reported defensively; the
/// constraint divergence at the feasibility boundary makes this unreachable
/// for well-posed inputs.
struct InfeasibleAlpha : SolverError {
  using SolverError::SolverError;
};

/// Which side of the optimality system is solved: Sup grows the covariance
/// (multiplier >= 0), Inf shrinks it (multiplier <= 0).
enum class Branch { Sup, Inf };

struct SolverConfig {
  double tol_kl = 1e-10;          // |KL - epsilon| at the solution
  double tol_fixed_point = 1e-12; // relative Frobenius self-consistency residual
  int max_inner_iters = 500;      // per continuation rung
  int max_outer_iters = 200;      // continuation rungs in total
  double damping = 1.0;           // scales the mixing of the outer iteration, (0, 1]

  void validate() const;
};

struct SaddleSolution {
  double alpha;
  SpdMatrix sigma_x;
  Branch branch;
  double kl_achieved;            // nats, recomputed from the returned covariance
  double fixed_point_residual;   // || Sx - (I + alpha Dn) S0 ||_F
  double alt_residual;           // inverse-free optimality residual, see alt_optimality_residual
  int iterations;                // total inner iterations across all rungs
};

/// Solves the coupled optimality system
///   Sx = (I + alpha Dn(Sx)) S0,   KL(N(mu0, Sx) || P0) = epsilon
/// on the requested branch. The covariance satisfies Sx >= S0 (Sup) or
/// Sx <= S0 (Inf) in the Loewner order.
///
/// Method: continuation over an increasing KL ladder. At each rung the
/// multiplier is eliminated exactly along the frozen-coefficient path
/// Sx(a) = (S0^{-1} - a M)^{-1} (scalar Brent solve in the eigenbasis of
/// S0^{1/2} M S0^{1/2}), and the self-consistency M = Wn(Sx)^T Wn(Sx) is
/// restored by an Anderson-accelerated outer iteration with a damped Newton
/// fallback on the joint (Sx, alpha) system.
SaddleSolution solve_saddle(const KlBall& ball, const SpdMatrix& sigma_n, Branch branch,
                            const SolverConfig& cfg = {});

/// Frobenius norm of (I + Sn^{-1} Sx)^T (I + Sn^{-1} Sx)(I - S0^{-1} Sx) + alpha Sx,
/// an equivalent inverse-free form of the optimality condition. Kept as a
/// diagnostic with a looser gate than the fixed-point residual.
double alt_optimality_residual(const SpdMatrix& sigma_x, const SpdMatrix& sigma_0,
                               const SpdMatrix& sigma_n, double alpha);

/// Minimax-robust estimator: the Bayes estimator matched to the Sup-branch
/// covariance. Returns the estimator together with the solution it is built from.
std::pair<LinearEstimator, SaddleSolution> robust_estimator(const KlBall& ball,
                                                            const SpdMatrix& sigma_n,
                                                            const SolverConfig& cfg = {});

/// (lower, upper) MMSE bounds over the ball: the channel MMSE evaluated at
/// the Inf- and Sup-branch covariances.
std::pair<double, double> mmse_bounds(const KlBall& ball, const SpdMatrix& sigma_n,
                                      const SolverConfig& cfg = {});

/// Least favorable prior against the fixed nominal estimator anchored at mu0:
/// N(mu0, Sx) with Sx^{-1} = S0^{-1} - alpha M0, M0 = Wn0^T Wn0 held at S0,
/// and alpha >= 0 chosen so the KL constraint is active.
GaussianDist least_favorable_vs_nominal(const KlBall& ball, const SpdMatrix& sigma_n,
                                        const SolverConfig& cfg = {});

/// Deterministic in-ball Gaussians for empirical saddle-point checks:
/// covariance S0^{1/2} (I + delta*S) S0^{1/2} with a random unit-spectral-radius
/// symmetric S plus a random mean shift, delta bisected until the divergence
/// lands in [eps/2, eps] (or the perturbation cap if the ball is larger than
/// the cap can reach).
std::vector<GaussianDist> sample_in_ball_gaussians(const KlBall& ball, int count,
                                                   std::uint64_t seed);

}  // namespace klmmse
