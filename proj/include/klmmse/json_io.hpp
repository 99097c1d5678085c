#pragma once

#include <json.hpp>

#include "klmmse/monte_carlo.hpp"
#include "klmmse/saddle.hpp"

namespace klmmse {

using Json = nlohmann::json;

/// Wire schema: {"dim": K, "rows": [[...], ...]}, row-major doubles.
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

/// Wire schema: {"values": [...]}.
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

/// {"alpha", "sigma_x", "branch": "sup"|"inf", "kl_achieved",
///  "residual_eq3", "residual_eq9", "iterations"}
Json solution_to_json(const SaddleSolution& sol);

/// {"trials", "violations", "worst_margin"}
Json report_to_json(const BoundsValidationReport& report);

}  // namespace klmmse
