#pragma once

#include "sgf/planner.hpp"

#include <string>

namespace sgf {

/// Graphviz digraph: one node per job (label, grouped equations, estimated
/// cost), one edge per data dependency.
std::string to_dot(const Plan& plan, const Database& db);

/// Stages, MSJ blocks, jobs with their rounds and estimated costs, warnings.
std::string to_json(const Plan& plan, const Database& db);

} // namespace sgf
