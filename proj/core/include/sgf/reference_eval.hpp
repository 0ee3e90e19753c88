#pragma once

#include "sgf/database.hpp"
#include "sgf/query.hpp"

#include <map>
#include <string>
#include <vector>

namespace sgf {

using Substitution = std::map<std::string, std::string, std::less<>>;

/// Truth of `c` under `sigma`, scanning conditional relations directly.
/// A leaf T(v) holds iff some fact of T conforms to v and agrees with sigma
/// on the variables v shares with `guard`.
bool eval_condition(const Database& db, const Atom& guard, const Substitution& sigma, const ConditionPtr& c);

/// Set of sigma(out_vars) over guard facts whose substitution satisfies the
/// condition. Throws UnknownRelation or ArityMismatch.
Relation eval_bsgf(const Database& db, const BsgfQuery& q);

struct SgfEvaluation {
    Database database; // input extended with every Z_i
    std::vector<std::string> outputs;

    const Relation& final_relation() const { return database.at(outputs.back()); }
};

SgfEvaluation eval_sgf(const Database& db, const SgfQuery& q);

} // namespace sgf
