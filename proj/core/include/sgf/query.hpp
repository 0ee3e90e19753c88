#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace sgf {

/// Data values are untyped byte strings. Integer literals are normalized
/// (optional sign, no leading zeros) so that `007`, `"7"` and `7` are the
/// same datum.
std::string canonical_datum(std::string_view raw);
bool is_integer_literal(std::string_view raw);

struct SourcePos {
    std::size_t line = 0;
    std::size_t column = 0;
};

class Term {
public:
    enum class Kind { Variable, Constant };

    static Term variable(std::string name);
    static Term constant(std::string_view value);

    Kind kind() const noexcept { return kind_; }
    bool is_variable() const noexcept { return kind_ == Kind::Variable; }
    bool is_constant() const noexcept { return kind_ == Kind::Constant; }
    const std::string& text() const noexcept { return text_; }

    bool operator==(const Term&) const = default;
    auto operator<=>(const Term&) const = default;

private:
    Term(Kind kind, std::string text) : kind_(kind), text_(std::move(text)) {}

    Kind kind_ = Kind::Variable;
    std::string text_;
};

struct Atom {
    std::string relation;
    std::vector<Term> terms;
    SourcePos pos{};

    std::size_t arity() const noexcept { return terms.size(); }

    /// Distinct variables in order of first occurrence.
    std::vector<std::string> variables() const;
    bool mentions(std::string_view var) const;

    // Source positions do not take part in structural equality.
    bool operator==(const Atom& other) const { return relation == other.relation && terms == other.terms; }
    bool operator<(const Atom& other) const {
        return relation != other.relation ? relation < other.relation : terms < other.terms;
    }
};

using Tuple = std::vector<std::string>;

struct Fact {
    std::string relation;
    Tuple values;

    bool operator==(const Fact&) const = default;
};

/// Immutable Boolean combination of conditional atoms.
class Condition;
using ConditionPtr = std::shared_ptr<const Condition>;

class Condition {
public:
    enum class Kind { And, Or, Not, Leaf };

    static ConditionPtr leaf(Atom atom);
    static ConditionPtr negate(ConditionPtr child);
    static ConditionPtr conj(ConditionPtr lhs, ConditionPtr rhs);
    static ConditionPtr disj(ConditionPtr lhs, ConditionPtr rhs);

    Kind kind() const noexcept { return kind_; }
    const Atom& atom() const noexcept { return atom_; }
    const ConditionPtr& lhs() const noexcept { return lhs_; }
    const ConditionPtr& rhs() const noexcept { return rhs_; }
    /// Child of a Not node.
    const ConditionPtr& child() const noexcept { return lhs_; }

    /// Leaves in left-to-right order, duplicates included.
    std::vector<Atom> atoms() const;

private:
    Condition(Kind kind, Atom atom, ConditionPtr lhs, ConditionPtr rhs)
        : kind_(kind), atom_(std::move(atom)), lhs_(std::move(lhs)), rhs_(std::move(rhs)) {}

    Kind kind_;
    Atom atom_;
    ConditionPtr lhs_;
    ConditionPtr rhs_;
};

bool equal(const ConditionPtr& a, const ConditionPtr& b);

struct BsgfQuery {
    std::string output;
    std::vector<std::string> out_vars;
    Atom guard;
    ConditionPtr condition; // null when there is no WHERE clause
    SourcePos pos{};

    bool has_condition() const noexcept { return condition != nullptr; }
    /// Distinct conditional atoms in order of first appearance.
    std::vector<Atom> conditional_atoms() const;
    /// Relation names mentioned by the guard and the condition.
    std::vector<std::string> mentioned_relations() const;
};

bool operator==(const BsgfQuery& a, const BsgfQuery& b);

struct SgfQuery {
    std::vector<BsgfQuery> queries;

    std::size_t size() const noexcept { return queries.size(); }
    const BsgfQuery& operator[](std::size_t i) const { return queries[i]; }
    /// Index of the query producing `name`, or size() when none does.
    std::size_t producer_of(std::string_view name) const;
};

bool operator==(const SgfQuery& a, const SgfQuery& b);

} // namespace sgf
