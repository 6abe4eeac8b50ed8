#pragma once

#include <filesystem>
#include <string>

#include "fairmatch/model.hpp"

namespace fairmatch {

/// Instance documents are JSON objects:
///
///   { "workers": ["a", "b"], "task_types": ["t"],
///     "lambda": {"t": 0.5}, "mu": {"a|t": 1.0, "b|t": 2.0} }
///
/// Edges are created in the order of the "mu" keys; a missing key means no
/// edge. Malformed documents raise std::invalid_argument.
Instance parse_instance_json(const std::string& text);
Instance load_instance(const std::filesystem::path& path);
std::string instance_to_json(const Instance& inst);

/// {"worker|type": x_ij, ...} in edge order.
std::string policy_to_json(const Instance& inst, const PolicyMatrix& x);

}  // namespace fairmatch
