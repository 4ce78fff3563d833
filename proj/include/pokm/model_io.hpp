#pragma once

#include "pokm/types.hpp"

#include <string>

namespace pokm {

inline constexpr int kModelSchemaVersion = 1;

// Keys, in order: schema, version, k, dim, m, seed, objective, iterations,
// converged, means (k rows), assignments (one [primary] or
// [primary, secondary] array per element), labels (only when present).
std::string model_to_json(const ClusterModel<double>& model, const std::vector<std::string>& labels = {});

// Throws std::invalid_argument on schema violations.
ClusterModel<double> model_from_json(const std::string& text);

}  // namespace pokm
