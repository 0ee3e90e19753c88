#pragma once

#include <map>
#include <string>

namespace sgf {

/// Benchmark query texts keyed by id: A1-A5 and B1-B2 are single-level
/// query shapes over the guard R(x,y,z,w) (A4, A5 also G); C1-C4 are
/// multi-query shapes.
const std::map<std::string, std::string>& builtin_templates();

/// Throws Error(UnknownTemplate).
const std::string& template_text(const std::string& id);

} // namespace sgf
