#pragma once

// Shared fixtures: database builders, an independent nested-loop evaluator
// and random instance generators.

#include "sgf/database.hpp"
#include "sgf/parser.hpp"
#include "sgf/query.hpp"

#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace sgf::test {

inline Database make_db(const std::map<std::string, std::vector<Tuple>>& rels) {
    Database db;
    for (const auto& [name, tuples] : rels)
        db.put(name, Relation(tuples.empty() ? 0 : tuples.front().size(), tuples));
    return db;
}

// Explicit arities, for empty relations.
inline Database make_typed_db(const std::map<std::string, std::pair<std::size_t, std::vector<Tuple>>>& rels) {
    Database db;
    for (const auto& [name, r] : rels)
        db.put(name, Relation(r.first, r.second));
    return db;
}

inline std::set<Tuple> as_set(const Relation& r) { return {r.tuples().begin(), r.tuples().end()}; }

// Textbook semantics, written without the library's matching helpers.
class NestedLoop {
public:
    explicit NestedLoop(const Database& db) : db_(db) {}

    std::set<Tuple> eval(const BsgfQuery& q) const {
        std::set<Tuple> out;
        for (const auto& t : tuples(q.guard.relation)) {
            auto sigma = bind(q.guard, t, {});
            if (!sigma)
                continue;
            if (q.condition && !holds(q.condition, *sigma))
                continue;
            Tuple row;
            for (const auto& v : q.out_vars)
                row.push_back(sigma->at(v));
            out.insert(row);
        }
        return out;
    }

    // Evaluates every query in order, feeding outputs forward.
    std::map<std::string, std::set<Tuple>> eval(const SgfQuery& q) {
        std::map<std::string, std::set<Tuple>> all;
        for (const auto& b : q.queries) {
            all[b.output] = eval(b);
            derived_[b.output] = {all[b.output].begin(), all[b.output].end()};
        }
        return all;
    }

private:
    using Sigma = std::map<std::string, std::string>;

    std::vector<Tuple> tuples(const std::string& rel) const {
        if (auto it = derived_.find(rel); it != derived_.end())
            return it->second;
        const Relation* r = db_.find(rel);
        return r ? r->tuples() : std::vector<Tuple>{};
    }

    // Extends sigma so that atom a maps onto t; nothing when impossible.
    static std::optional<Sigma> bind(const Atom& a, const Tuple& t, Sigma sigma) {
        if (a.terms.size() != t.size())
            return std::nullopt;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const Term& term = a.terms[i];
            if (term.is_constant()) {
                if (term.text() != t[i])
                    return std::nullopt;
                continue;
            }
            auto [it, fresh] = sigma.emplace(term.text(), t[i]);
            if (!fresh && it->second != t[i])
                return std::nullopt;
        }
        return sigma;
    }

    bool holds(const ConditionPtr& c, const Sigma& sigma) const {
        switch (c->kind()) {
        case Condition::Kind::And: return holds(c->lhs(), sigma) && holds(c->rhs(), sigma);
        case Condition::Kind::Or: return holds(c->lhs(), sigma) || holds(c->rhs(), sigma);
        case Condition::Kind::Not: return !holds(c->child(), sigma);
        case Condition::Kind::Leaf: {
            // Only variables bound by the guard constrain the match.
            for (const auto& t : tuples(c->atom().relation))
                if (bind(c->atom(), t, sigma))
                    return true;
            return false;
        }
        }
        return false;
    }

    const Database& db_;
    std::map<std::string, std::vector<Tuple>> derived_;
};

// Random guarded BSGF over relations named R*, S*, T* with a tiny domain so
// that matches are frequent.
struct RandomInstance {
    SgfQuery query;
    Database db;
};

inline std::string random_term(std::mt19937& rng, const std::vector<std::string>& vars, double const_p) {
    std::uniform_real_distribution<double> u(0, 1);
    if (u(rng) < const_p)
        return std::to_string(std::uniform_int_distribution<int>(0, 3)(rng));
    return vars[std::uniform_int_distribution<std::size_t>(0, vars.size() - 1)(rng)];
}

// Condition text over `atoms` combined with random AND/OR/NOT.
inline std::string random_condition(std::mt19937& rng, const std::vector<std::string>& atoms, std::size_t lo,
                                    std::size_t hi) {
    std::uniform_int_distribution<int> coin(0, 1);
    std::string body;
    if (hi - lo == 1)
        body = atoms[lo];
    else {
        std::size_t mid = lo + std::uniform_int_distribution<std::size_t>(1, hi - lo - 1)(rng);
        body = "(" + random_condition(rng, atoms, lo, mid) + (coin(rng) ? " AND " : " OR ") +
               random_condition(rng, atoms, mid, hi) + ")";
    }
    return coin(rng) && coin(rng) ? "NOT " + body : body;
}

// A single BSGF: guard R(vars...) possibly with a constant or a repeated
// variable, conditionals over disjoint fresh variables plus guard variables.
inline RandomInstance random_bsgf(std::mt19937& rng, std::size_t max_atoms = 4, std::size_t facts = 40) {
    std::uniform_int_distribution<std::size_t> arity_d(1, 3), atoms_d(1, max_atoms), val(0, 3);
    std::size_t garity = arity_d(rng) + 1;
    std::vector<std::string> gvars;
    std::string guard = "R(";
    for (std::size_t i = 0; i < garity; ++i) {
        std::string t;
        if (i > 0 && val(rng) == 0)
            t = std::to_string(val(rng));
        else if (i > 0 && val(rng) == 0)
            t = gvars.front();
        else {
            t = "g" + std::to_string(i);
            gvars.push_back(t);
        }
        guard += (i ? "," : "") + t;
    }
    guard += ")";

    std::map<std::string, std::size_t> arities{{"R", garity}};
    std::vector<std::string> atoms;
    std::size_t n = atoms_d(rng), fresh = 0;
    for (std::size_t k = 0; k < n; ++k) {
        std::string rel = std::string(1, "STU"[std::uniform_int_distribution<int>(0, 2)(rng)]);
        if (!arities.count(rel))
            arities[rel] = arity_d(rng);
        std::string a = rel + "(";
        for (std::size_t i = 0; i < arities[rel]; ++i) {
            std::string t = val(rng) == 0 ? "f" + std::to_string(fresh++) : random_term(rng, gvars, 0.15);
            a += (i ? "," : "") + t;
        }
        atoms.push_back(a + ")");
    }
    std::vector<std::string> out;
    for (const auto& v : gvars)
        if (val(rng) != 0 || out.empty())
            out.push_back(v);
    std::string text = "Z := SELECT ";
    for (std::size_t i = 0; i < out.size(); ++i)
        text += (i ? ", " : "") + out[i];
    text += " FROM " + guard + " WHERE " + random_condition(rng, atoms, 0, atoms.size()) + ";";

    RandomInstance inst;
    inst.query = parse_program(text);
    for (const auto& [rel, ar] : arities) {
        std::vector<Tuple> ts;
        std::size_t count = std::uniform_int_distribution<std::size_t>(0, facts)(rng);
        for (std::size_t k = 0; k < count; ++k) {
            Tuple t;
            for (std::size_t i = 0; i < ar; ++i)
                t.push_back(std::to_string(val(rng)));
            ts.push_back(t);
        }
        inst.db.put(rel, Relation(ar, ts));
    }
    return inst;
}

} // namespace sgf::test
