#include "klmmse/spd_matrix.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace klmmse {

namespace {

void check_square(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw std::invalid_argument("SpdMatrix: matrix must be square and non-empty");
  }
}

}  // namespace

SpdMatrix::SpdMatrix(Matrix entries) {
  check_square(entries);
  const double scale = entries.cwiseAbs().maxCoeff();
  const double asym = (entries - entries.transpose()).cwiseAbs().maxCoeff();
  if (scale > 0.0 && asym > 1e-12 * scale) {
    throw std::invalid_argument("SpdMatrix: input is not symmetric (relative asymmetry " +
                                std::to_string(asym / scale) + ")");
  }
  entries_ = symmetrized(entries);
  llt_.compute(entries_);
  if (llt_.info() != Eigen::Success) {
    throw std::invalid_argument("SpdMatrix: matrix is not positive definite");
  }
}

Matrix SpdMatrix::inverse() const {
  return llt_.solve(Matrix::Identity(dim(), dim()));
}

double SpdMatrix::log_det() const {
  // det = prod L_ii^2 for A = L L^T
  return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

Matrix SpdMatrix::sqrt() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(entries_);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

SpdMatrix toeplitz_exp_cov(int dim, double rate) {
  if (dim <= 0) throw std::invalid_argument("toeplitz_exp_cov: dim must be positive");
  if (!(rate > 0.0)) throw std::invalid_argument("toeplitz_exp_cov: rate must be positive");
  Matrix m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      m(i, j) = std::exp(-rate * std::abs(i - j));
    }
  }
  return SpdMatrix(std::move(m));
}

bool is_positive_definite(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0) return false;
  Eigen::LLT<Matrix> llt(symmetrized(a));
  return llt.info() == Eigen::Success;
}

}  // namespace klmmse
