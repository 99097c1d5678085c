#include "klmmse/json_io.hpp"

#include <stdexcept>

namespace klmmse {

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return Json{{"dim", m.rows()}, {"rows", std::move(rows)}};
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("rows")) {
    throw std::invalid_argument("matrix_from_json: expected {\"dim\", \"rows\"}");
  }
  const auto dim = j.at("dim").get<Eigen::Index>();
  const Json& rows = j.at("rows");
  if (dim <= 0 || !rows.is_array() || static_cast<Eigen::Index>(rows.size()) != dim) {
    throw std::invalid_argument("matrix_from_json: dim does not match rows");
  }
  Matrix m(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const Json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim) {
      throw std::invalid_argument("matrix_from_json: ragged rows");
    }
    for (Eigen::Index c = 0; c < dim; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

Json vector_to_json(const Vector& v) {
  Json values = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) values.push_back(v[i]);
  return Json{{"values", std::move(values)}};
}

Vector vector_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("values") || !j.at("values").is_array()) {
    throw std::invalid_argument("vector_from_json: expected {\"values\": [...]}");
  }
  const Json& values = j.at("values");
  Vector v(static_cast<Eigen::Index>(values.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = values[static_cast<std::size_t>(i)].get<double>();
  return v;
}

Json solution_to_json(const SaddleSolution& sol) {
  return Json{{"alpha", sol.alpha},
              {"sigma_x", matrix_to_json(sol.sigma_x.matrix())},
              {"branch", sol.branch == Branch::Sup ? "sup" : "inf"},
              {"kl_achieved", sol.kl_achieved},
              {"residual_eq3", sol.fixed_point_residual},
              {"residual_eq9", sol.alt_residual},
              {"iterations", sol.iterations}};
}

Json report_to_json(const BoundsValidationReport& report) {
  return Json{{"trials", report.trials},
              {"violations", report.violations},
              {"worst_margin", report.worst_margin}};
}

}  // namespace klmmse
