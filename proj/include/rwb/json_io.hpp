#pragma once

#include <json.hpp>

#include "rwb/expression.hpp"
#include "rwb/verify.hpp"

namespace rwb {

nlohmann::json vec_to_json(const Vec& v);
/// Expects a non-empty array of numbers.
Vec vec_from_json(const nlohmann::json& j);

/// Scalars print as a bare number when the imaginary part is negligible
/// relative to the magnitude, otherwise as [re, im].
nlohmann::json complex_to_json(Complex z);

/// Schema: { "class": <classification token>, "terms": [ { "coeff": [re, im],
/// "word": [ { "kind": "cliff"|"field"|"res", "lambda": <res only>,
/// "coeffs": [..] } ] } ] } plus "core": true when the expression carries
/// core provenance. Term order is the library's normal order, so
/// serialize -> parse -> serialize is the identity.
nlohmann::json expression_to_json(const Expression& a);

/// Inverse of expression_to_json; atoms bind to `model`, pure scalars keep a
/// null model. Malformed input raises std::invalid_argument naming the spot.
Expression expression_from_json(const nlohmann::json& j, const ModelPtr& model);

/// Report schema: { check_id, params, residuals: { max, mean, per_case: [
/// { label, residual, tolerance, pass } ] }, tolerance, verdict,
/// wall_time_ms } with any check-specific diagnostics under "extra".
nlohmann::json report_to_json(const CheckReport& r);

}  // namespace rwb
