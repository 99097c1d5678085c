#pragma once

#include <Eigen/Dense>

namespace klmmse {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Symmetric positive-definite matrix with an eagerly computed Cholesky
/// factorization. Construction symmetrizes the input, rejects matrices
/// whose asymmetry exceeds a relative tolerance of 1e-12, and rejects
/// matrices that are not positive definite.
class SpdMatrix {
 public:
  explicit SpdMatrix(Matrix entries);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& matrix() const { return entries_; }
  const Eigen::LLT<Matrix>& llt() const { return llt_; }

  /// A^{-1} B via the cached factorization.
  Matrix solve(const Matrix& rhs) const { return llt_.solve(rhs); }
  Vector solve(const Vector& rhs) const { return llt_.solve(rhs); }

  Matrix inverse() const;
  double log_det() const;
  double trace() const { return entries_.trace(); }

  /// Symmetric square root via eigendecomposition.
  Matrix sqrt() const;

 private:
  Matrix entries_;
  Eigen::LLT<Matrix> llt_;
};

/// Exponentially decaying Toeplitz covariance, entries e^{-rate*|i-j|}.
/// Positive definite for every rate > 0; unit diagonal.
SpdMatrix toeplitz_exp_cov(int dim, double rate);

/// True when chol(sym(a)) succeeds; input is symmetrized first.
bool is_positive_definite(const Matrix& a);

inline Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

}  // namespace klmmse
