#include "sgf/reference_eval.hpp"

#include "sgf/analysis.hpp"
#include "sgf/error.hpp"
#include "sgf/parser.hpp"

#include <unordered_set>

namespace sgf {

namespace {

const Relation& lookup(const Database& db, const Atom& a) {
    const Relation& r = db.at(a.relation);
    if (r.arity() != a.arity() && !r.empty())
        throw Error(ErrorCode::ArityMismatch, "atom " + pretty_print(a) + " does not match arity " +
                                                  std::to_string(r.arity()) + " of relation " + a.relation);
    return r;
}

std::string join_values(const Tuple& t) {
    std::string s;
    for (const auto& v : t) {
        s += v;
        s.push_back('\x1f');
    }
    return s;
}

// Per distinct conditional atom: the set of join-key projections of its conforming facts.
struct LeafIndex {
    Atom atom;
    std::vector<std::size_t> guard_pos;
    std::unordered_set<std::string> keys;
};

bool eval_indexed(const Condition& c, const std::vector<LeafIndex>& leaves, const Tuple& fact) {
    switch (c.kind()) {
    case Condition::Kind::And: return eval_indexed(*c.lhs(), leaves, fact) && eval_indexed(*c.rhs(), leaves, fact);
    case Condition::Kind::Or: return eval_indexed(*c.lhs(), leaves, fact) || eval_indexed(*c.rhs(), leaves, fact);
    case Condition::Kind::Not: return !eval_indexed(*c.child(), leaves, fact);
    case Condition::Kind::Leaf:
        for (const auto& l : leaves)
            if (l.atom == c.atom())
                return l.keys.count(join_values(pick(fact, l.guard_pos))) > 0;
        break;
    }
    throw Error(ErrorCode::InvalidPlan, "unindexed conditional atom");
}

} // namespace

bool eval_condition(const Database& db, const Atom& guard, const Substitution& sigma, const ConditionPtr& c) {
    switch (c->kind()) {
    case Condition::Kind::And:
        return eval_condition(db, guard, sigma, c->lhs()) && eval_condition(db, guard, sigma, c->rhs());
    case Condition::Kind::Or:
        return eval_condition(db, guard, sigma, c->lhs()) || eval_condition(db, guard, sigma, c->rhs());
    case Condition::Kind::Not: return !eval_condition(db, guard, sigma, c->child());
    case Condition::Kind::Leaf: break;
    }
    const Atom& a = c->atom();
    const Relation& rel = lookup(db, a);
    std::vector<std::string> shared = join_key(guard, a);
    AtomPattern pattern(a);
    std::vector<std::size_t> pos = pattern.positions(shared);
    for (const auto& t : rel.tuples()) {
        if (!pattern.matches(t))
            continue;
        bool agree = true;
        for (std::size_t k = 0; k < shared.size() && agree; ++k) {
            auto it = sigma.find(shared[k]);
            agree = it != sigma.end() && it->second == t[pos[k]];
        }
        if (agree)
            return true;
    }
    return false;
}

Relation eval_bsgf(const Database& db, const BsgfQuery& q) {
    const Relation& guard = lookup(db, q.guard);
    AtomPattern gp(q.guard);
    std::vector<std::size_t> out_pos = gp.positions(q.out_vars);

    std::vector<LeafIndex> leaves;
    for (const auto& a : q.conditional_atoms()) {
        const Relation& rel = lookup(db, a);
        std::vector<std::string> key = join_key(q.guard, a);
        AtomPattern cp(a);
        std::vector<std::size_t> cpos = cp.positions(key);
        LeafIndex l{a, gp.positions(key), {}};
        for (const auto& t : rel.tuples())
            if (cp.matches(t))
                l.keys.insert(join_values(pick(t, cpos)));
        leaves.push_back(std::move(l));
    }

    std::vector<Tuple> out;
    for (const auto& t : guard.tuples()) {
        if (!gp.matches(t))
            continue;
        if (q.condition && !eval_indexed(*q.condition, leaves, t))
            continue;
        out.push_back(pick(t, out_pos));
    }
    return Relation(q.out_vars.size(), std::move(out));
}

SgfEvaluation eval_sgf(const Database& db, const SgfQuery& q) {
    SgfEvaluation result{db, {}};
    for (const auto& b : q.queries) {
        result.database.put(b.output, eval_bsgf(result.database, b));
        result.outputs.push_back(b.output);
    }
    return result;
}

} // namespace sgf
