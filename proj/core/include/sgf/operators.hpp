#pragma once

#include "sgf/job.hpp"
#include "sgf/query.hpp"

#include <functional>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace sgf {

/// X := SELECT out_vars FROM guard WHERE cond (or WHERE NOT cond when anti).
struct SemiJoinEquation {
    std::string output;
    std::vector<std::string> out_vars;
    Atom guard;
    Atom cond;
    bool anti = false;

    std::vector<std::string> key() const;
};

/// Propositional formula over semi-join outputs, variables numbered from 0.
class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

class Formula {
public:
    enum class Kind { And, Or, Not, Var };

    static FormulaPtr var(std::size_t index);
    static FormulaPtr negate(FormulaPtr child);
    static FormulaPtr conj(FormulaPtr lhs, FormulaPtr rhs);
    static FormulaPtr disj(FormulaPtr lhs, FormulaPtr rhs);

    Kind kind() const noexcept { return kind_; }
    std::size_t index() const noexcept { return index_; }
    const FormulaPtr& lhs() const noexcept { return lhs_; }
    const FormulaPtr& rhs() const noexcept { return rhs_; }

    bool evaluate(const std::function<bool(std::size_t)>& value) const;
    std::set<std::size_t> variables() const;
    std::string to_string(const std::vector<std::string>& names) const;

private:
    Formula(Kind kind, std::size_t index, FormulaPtr lhs, FormulaPtr rhs)
        : kind_(kind), index_(index), lhs_(std::move(lhs)), rhs_(std::move(rhs)) {}

    Kind kind_;
    std::size_t index_;
    FormulaPtr lhs_;
    FormulaPtr rhs_;
};

/// Mirrors `c` with every leaf replaced by its position in `atoms`.
FormulaPtr formula_from(const ConditionPtr& c, const std::vector<Atom>& atoms);

struct OperatorConfig {
    bool packing = true;
    /// Semi-join outputs hold tuple ids instead of tuples; EVAL re-reads the guard.
    bool tuple_id = false;
};

/// One MR job evaluating all equations. Outputs follow equation order; each
/// holds the equation's out_vars tuple, or a single tuple-id column.
/// Throws DuplicateOutputName.
JobSpec build_msj_job(const std::string& id, const std::vector<SemiJoinEquation>& eqs, const OperatorConfig& cfg);

/// Y := guard AND phi, where variable k of phi stands for relation inputs[k].
/// The semi-join relations hold the guard's variables() tuples (or ids).
struct EvalEntry {
    std::string output;
    std::vector<std::string> out_vars;
    Atom guard;
    std::vector<std::string> inputs;
    FormulaPtr phi;
};

/// One MR job computing every entry. Throws OverlappingFormulaVariables when
/// two entries read the same semi-join relation.
JobSpec build_eval_job(const std::string& id, const std::vector<EvalEntry>& entries, const OperatorConfig& cfg);

/// All conditional atoms have the same join key with the guard.
bool one_round_eligible(const BsgfQuery& q);

/// Semi-joins and the Boolean combination in a single job. Throws NotEligible.
JobSpec build_one_round_job(const std::string& id, const BsgfQuery& q, const OperatorConfig& cfg);

/// Map-only job writing the projection of the conforming guard facts.
JobSpec build_projection_job(const std::string& id, const BsgfQuery& q);

} // namespace sgf
