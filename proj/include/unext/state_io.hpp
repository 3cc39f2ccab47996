#pragma once

// Text forms of states used by the command line: named-state strings such as
// "isotropic:0.85:2", and the JSON matrix format
//   {"dim": N, "dims": [d1, d2, ...], "entries": [[re, im], ...]}   (row-major)

#include "unext/states.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>

namespace unext {

/// Parses "max-entangled:m", "isotropic:t:d", "depolarizing-choi:p" or "erasure:q".
/// Throws std::invalid_argument on malformed input.
DensityMatrixd parse_named_state(std::string_view spec);

nlohmann::json matrix_to_json(const Eigen::MatrixXcd& m, const SubsystemDims& dims);
nlohmann::json state_to_json(const DensityMatrixd& rho);

/// Validates shape and density-matrix invariants.
DensityMatrixd state_from_json(const nlohmann::json& j);

}  // namespace unext
