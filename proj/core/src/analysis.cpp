#include "sgf/analysis.hpp"

#include "sgf/error.hpp"
#include "sgf/parser.hpp"

#include <algorithm>
#include <map>

namespace sgf {

std::string_view to_string(ViolationKind kind) {
    switch (kind) {
    case ViolationKind::GuardednessViolation: return "GuardednessViolation";
    case ViolationKind::OutputVarNotInGuard: return "OutputVarNotInGuard";
    case ViolationKind::ForwardReference: return "ForwardReference";
    case ViolationKind::ArityMismatch: return "ArityMismatch";
    case ViolationKind::DuplicateOutputName: return "DuplicateOutputName";
    }
    return "?";
}

bool ValidationReport::has(ViolationKind kind) const {
    return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.kind == kind; });
}

namespace {

std::string where(const BsgfQuery& b) { return "query " + b.output + ": "; }

} // namespace

ValidationReport validate(const SgfQuery& q) {
    ValidationReport report;
    auto add = [&](ViolationKind kind, std::size_t i, std::vector<Atom> atoms, std::string msg) {
        report.violations.push_back({kind, i, std::move(atoms), std::move(msg)});
    };

    std::map<std::string, std::size_t, std::less<>> first_def;
    std::map<std::string, std::pair<std::size_t, Atom>, std::less<>> arity;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const BsgfQuery& b = q[i];
        if (auto [it, fresh] = first_def.emplace(b.output, i); !fresh)
            add(ViolationKind::DuplicateOutputName, i, {}, where(b) + "output already defined by query " +
                                                                 std::to_string(it->second + 1));

        auto note = [&](const Atom& a) {
            auto [it, fresh] = arity.emplace(a.relation, std::make_pair(a.arity(), a));
            if (!fresh && it->second.first != a.arity())
                add(ViolationKind::ArityMismatch, i, {it->second.second, a},
                    where(b) + a.relation + " has arity " + std::to_string(a.arity()) + " but earlier " +
                        std::to_string(it->second.first));
        };
        Atom head{b.output, {}, b.pos};
        for (const auto& v : b.out_vars)
            head.terms.push_back(Term::variable(v));
        note(head);
        note(b.guard);

        for (const auto& v : b.out_vars)
            if (!b.guard.mentions(v))
                add(ViolationKind::OutputVarNotInGuard, i, {b.guard},
                    where(b) + "output variable " + v + " does not occur in guard " + pretty_print(b.guard));

        std::vector<Atom> conds;
        if (b.condition) {
            for (auto& a : b.condition->atoms()) {
                note(a);
                if (std::find(conds.begin(), conds.end(), a) != conds.end()) {
                    report.warnings.push_back(where(b) + "duplicate conditional atom " + pretty_print(a) +
                                              " ignored");
                    continue;
                }
                conds.push_back(std::move(a));
            }
        }
        for (std::size_t x = 0; x < conds.size(); ++x)
            for (std::size_t y = x + 1; y < conds.size(); ++y)
                for (const auto& v : conds[x].variables())
                    if (conds[y].mentions(v) && !b.guard.mentions(v))
                        add(ViolationKind::GuardednessViolation, i, {conds[x], conds[y]},
                            where(b) + "variable " + v + " shared by " + pretty_print(conds[x]) + " and " +
                                pretty_print(conds[y]) + " does not occur in the guard");

        for (const auto& rel : b.mentioned_relations()) {
            std::size_t p = q.producer_of(rel);
            if (p < q.size() && p >= i)
                add(ViolationKind::ForwardReference, i, {},
                    where(b) + (p == i ? "refers to its own output " : "refers to later output ") + rel);
        }
    }
    return report;
}

void require_valid(const SgfQuery& q) {
    ValidationReport r = validate(q);
    if (!r.ok())
        throw Error(ErrorCode::Validation,
                    std::string(to_string(r.violations.front().kind)) + ": " + r.violations.front().message);
}

bool conforms(const Fact& f, const Atom& a) { return f.relation == a.relation && conforms(f.values, a); }

bool conforms(std::span<const std::string> values, const Atom& a) {
    if (values.size() != a.arity())
        return false;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const Term& t = a.terms[i];
        if (t.is_constant()) {
            if (values[i] != t.text())
                return false;
            continue;
        }
        for (std::size_t j = 0; j < i; ++j)
            if (a.terms[j] == t && values[j] != values[i])
                return false;
    }
    return true;
}

Tuple project(const Fact& f, const Atom& a, const std::vector<std::string>& vars) {
    if (!conforms(f, a))
        throw Error(ErrorCode::NotConforming, "fact of " + f.relation + " does not conform to " + pretty_print(a));
    AtomPattern p(a);
    return pick(f.values, p.positions(vars));
}

std::vector<std::string> join_key(const Atom& guard, const Atom& cond) {
    std::vector<std::string> key;
    for (const auto& v : guard.variables())
        if (cond.mentions(v))
            key.push_back(v);
    return key;
}

AtomPattern::AtomPattern(const Atom& a) : arity_(a.arity()), relation_(a.relation) {
    for (std::size_t i = 0; i < a.terms.size(); ++i) {
        const Term& t = a.terms[i];
        if (t.is_constant()) {
            constants_.emplace_back(i, t.text());
            continue;
        }
        auto it = std::find_if(first_.begin(), first_.end(), [&](const auto& e) { return e.first == t.text(); });
        if (it == first_.end())
            first_.emplace_back(t.text(), i);
        else
            equalities_.emplace_back(i, it->second);
    }
}

bool AtomPattern::matches(std::span<const std::string> values) const {
    if (values.size() != arity_)
        return false;
    for (const auto& [i, c] : constants_)
        if (values[i] != c)
            return false;
    for (const auto& [i, j] : equalities_)
        if (values[i] != values[j])
            return false;
    return true;
}

std::vector<std::size_t> AtomPattern::positions(const std::vector<std::string>& vars) const {
    std::vector<std::size_t> out;
    out.reserve(vars.size());
    for (const auto& v : vars) {
        auto it = std::find_if(first_.begin(), first_.end(), [&](const auto& e) { return e.first == v; });
        if (it == first_.end())
            throw Error(ErrorCode::VariableAbsent, "variable " + v + " does not occur in atom over " + relation_);
        out.push_back(it->second);
    }
    return out;
}

std::string AtomPattern::signature() const {
    std::string s = relation_ + "/" + std::to_string(arity_);
    for (const auto& [i, c] : constants_)
        s += "|c" + std::to_string(i) + "=" + c;
    for (const auto& [i, j] : equalities_)
        s += "|e" + std::to_string(i) + "=" + std::to_string(j);
    return s;
}

Tuple pick(std::span<const std::string> values, std::span<const std::size_t> positions) {
    Tuple out;
    out.reserve(positions.size());
    for (std::size_t p : positions)
        out.push_back(values[p]);
    return out;
}

std::vector<std::size_t> DependencyGraph::predecessors(std::size_t v) const {
    std::vector<std::size_t> out;
    for (const auto& [a, b] : edges)
        if (b == v)
            out.push_back(a);
    return out;
}

std::vector<std::size_t> DependencyGraph::successors(std::size_t v) const {
    std::vector<std::size_t> out;
    for (const auto& [a, b] : edges)
        if (a == v)
            out.push_back(b);
    return out;
}

DependencyGraph dependency_graph(const SgfQuery& q) {
    DependencyGraph g;
    g.nodes = q.size();
    for (std::size_t j = 0; j < q.size(); ++j)
        for (const auto& rel : q[j].mentioned_relations()) {
            std::size_t i = q.producer_of(rel);
            if (i < j)
                g.edges.emplace(i, j);
        }
    return g;
}

} // namespace sgf
