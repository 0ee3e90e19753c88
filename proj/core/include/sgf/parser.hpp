#pragma once

#include "sgf/query.hpp"

#include <string>
#include <string_view>

namespace sgf {

/// Parses a program of `Z := SELECT vars FROM atom [WHERE cond];` assignments.
///
/// Keywords are case-insensitive, identifiers case-sensitive. `--` starts a
/// comment running to end of line. AND binds tighter than OR, NOT tightest.
/// Throws ParseError (Syntax, ArityMismatch or DuplicateOutputName) with the
/// position of the offending token.
SgfQuery parse_program(std::string_view text);

/// Renders a program so that parse_program(pretty_print(q)) == q.
std::string pretty_print(const SgfQuery& q);
std::string pretty_print(const BsgfQuery& q);
std::string pretty_print(const Atom& a);
std::string pretty_print(const ConditionPtr& c);

} // namespace sgf
