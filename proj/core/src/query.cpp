#include "sgf/query.hpp"

#include <algorithm>
#include <set>

namespace sgf {

bool is_integer_literal(std::string_view raw) {
    std::size_t i = 0;
    if (!raw.empty() && (raw[0] == '-' || raw[0] == '+'))
        i = 1;
    if (i == raw.size())
        return false;
    return std::all_of(raw.begin() + static_cast<std::ptrdiff_t>(i), raw.end(),
                       [](char c) { return c >= '0' && c <= '9'; });
}

std::string canonical_datum(std::string_view raw) {
    if (!is_integer_literal(raw))
        return std::string(raw);
    bool negative = raw[0] == '-';
    std::size_t i = (raw[0] == '-' || raw[0] == '+') ? 1 : 0;
    while (i + 1 < raw.size() && raw[i] == '0')
        ++i;
    std::string digits(raw.substr(i));
    if (digits == "0")
        return digits;
    return negative ? "-" + digits : digits;
}

Term Term::variable(std::string name) { return Term(Kind::Variable, std::move(name)); }
Term Term::constant(std::string_view value) { return Term(Kind::Constant, canonical_datum(value)); }

std::vector<std::string> Atom::variables() const {
    std::vector<std::string> out;
    for (const auto& t : terms)
        if (t.is_variable() && std::find(out.begin(), out.end(), t.text()) == out.end())
            out.push_back(t.text());
    return out;
}

bool Atom::mentions(std::string_view var) const {
    return std::any_of(terms.begin(), terms.end(),
                       [&](const Term& t) { return t.is_variable() && t.text() == var; });
}

ConditionPtr Condition::leaf(Atom atom) {
    return ConditionPtr(new Condition(Kind::Leaf, std::move(atom), nullptr, nullptr));
}
ConditionPtr Condition::negate(ConditionPtr child) {
    return ConditionPtr(new Condition(Kind::Not, {}, std::move(child), nullptr));
}
ConditionPtr Condition::conj(ConditionPtr lhs, ConditionPtr rhs) {
    return ConditionPtr(new Condition(Kind::And, {}, std::move(lhs), std::move(rhs)));
}
ConditionPtr Condition::disj(ConditionPtr lhs, ConditionPtr rhs) {
    return ConditionPtr(new Condition(Kind::Or, {}, std::move(lhs), std::move(rhs)));
}

namespace {
void collect_atoms(const Condition& c, std::vector<Atom>& out) {
    switch (c.kind()) {
    case Condition::Kind::Leaf: out.push_back(c.atom()); break;
    case Condition::Kind::Not: collect_atoms(*c.child(), out); break;
    case Condition::Kind::And:
    case Condition::Kind::Or:
        collect_atoms(*c.lhs(), out);
        collect_atoms(*c.rhs(), out);
        break;
    }
}
} // namespace

std::vector<Atom> Condition::atoms() const {
    std::vector<Atom> out;
    collect_atoms(*this, out);
    return out;
}

bool equal(const ConditionPtr& a, const ConditionPtr& b) {
    if (!a || !b)
        return !a && !b;
    if (a->kind() != b->kind())
        return false;
    switch (a->kind()) {
    case Condition::Kind::Leaf: return a->atom() == b->atom();
    case Condition::Kind::Not: return equal(a->child(), b->child());
    default: return equal(a->lhs(), b->lhs()) && equal(a->rhs(), b->rhs());
    }
}

std::vector<Atom> BsgfQuery::conditional_atoms() const {
    std::vector<Atom> out;
    if (!condition)
        return out;
    for (auto& a : condition->atoms())
        if (std::find(out.begin(), out.end(), a) == out.end())
            out.push_back(std::move(a));
    return out;
}

std::vector<std::string> BsgfQuery::mentioned_relations() const {
    std::vector<std::string> out{guard.relation};
    for (const auto& a : conditional_atoms())
        if (std::find(out.begin(), out.end(), a.relation) == out.end())
            out.push_back(a.relation);
    return out;
}

bool operator==(const BsgfQuery& a, const BsgfQuery& b) {
    return a.output == b.output && a.out_vars == b.out_vars && a.guard == b.guard && equal(a.condition, b.condition);
}

std::size_t SgfQuery::producer_of(std::string_view name) const {
    for (std::size_t i = 0; i < queries.size(); ++i)
        if (queries[i].output == name)
            return i;
    return queries.size();
}

bool operator==(const SgfQuery& a, const SgfQuery& b) { return a.queries == b.queries; }

} // namespace sgf
