#include "sgf/planner.hpp"

#include "sgf/encoding.hpp"
#include "sgf/error.hpp"
#include "sgf/parser.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>

namespace sgf {

std::string_view to_string(Strategy s) {
    switch (s) {
    case Strategy::Seq: return "SEQ";
    case Strategy::Par: return "PAR";
    case Strategy::Greedy: return "GREEDY";
    case Strategy::OneRound: return "ONE_ROUND";
    case Strategy::SeqUnit: return "SEQUNIT";
    case Strategy::ParUnit: return "PARUNIT";
    case Strategy::GreedySgf: return "GREEDY_SGF";
    case Strategy::OptBsgf: return "OPT_BSGF";
    case Strategy::OptSgf: return "OPT_SGF";
    }
    return "?";
}

std::vector<Strategy> all_strategies() {
    return {Strategy::Seq,     Strategy::Par,       Strategy::Greedy,  Strategy::OneRound, Strategy::SeqUnit,
            Strategy::ParUnit, Strategy::GreedySgf, Strategy::OptBsgf, Strategy::OptSgf};
}

Strategy parse_strategy(std::string_view name) {
    std::string up(name);
    for (auto& ch : up)
        ch = ch == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    for (Strategy s : all_strategies())
        if (to_string(s) == up)
            return s;
    throw Error(ErrorCode::Config, "unknown strategy '" + std::string(name) + "'");
}

ExtractedBsgf extract_semijoins(const BsgfQuery& q) {
    if (!q.condition)
        throw Error(ErrorCode::NoCondition, "query " + q.output + " has no WHERE clause");
    ExtractedBsgf ex;
    std::vector<Atom> atoms = q.conditional_atoms();
    std::vector<std::string> gvars = q.guard.variables();
    for (std::size_t k = 0; k < atoms.size(); ++k)
        ex.equations.push_back({q.output + ".x" + std::to_string(k + 1), gvars, q.guard, atoms[k], false});
    ex.phi = formula_from(q.condition, atoms);
    return ex;
}

// ---------------------------------------------------------------- statistics

Database bound_database(const Database& db, const SgfQuery& q) {
    Database out = db;
    for (const auto& b : q.queries) {
        if (out.has(b.output))
            continue;
        const Relation* guard = out.find(b.guard.relation);
        if (!guard)
            throw Error(ErrorCode::MissingStats, "no statistics for relation '" + b.guard.relation + "'");
        out.put(b.output, materialize_bound(*guard, {0, b.guard.relation, b.guard, b.out_vars, false},
                                            b.out_vars.size()));
    }
    return out;
}

namespace {

const Relation& stats_relation(const Database& db, const std::string& name) {
    const Relation* r = db.find(name);
    if (!r)
        throw Error(ErrorCode::MissingStats, "no statistics for relation '" + name + "'");
    return *r;
}

template <class Fn>
void scan(const Relation& rel, const SampleConfig& s, Fn fn) {
    for (std::size_t k = 0; k < rel.size(); ++k)
        if (sampled(s, rel.file_id(), k))
            fn(rel[k], k);
}

double id_size(const Relation& rel, std::size_t k) {
    return static_cast<double>(encode_tuple_id(rel.file_id(), k).size());
}

EquationStats equation_stats(const Database& db, const SemiJoinEquation& eq, std::size_t local_id,
                             const OperatorConfig& ops, const SampleConfig& s) {
    EquationStats st;
    double scale = 1.0 / s.rate;
    st.name = eq.output;
    st.guard = eq.guard.relation;
    st.cond = eq.cond.relation;
    std::vector<std::string> key = eq.key();

    const Relation& g = stats_relation(db, st.guard);
    st.guard_bytes = static_cast<double>(g.serialized_bytes());
    AtomPattern gp(eq.guard);
    auto gk = gp.positions(key), go = gp.positions(eq.out_vars);
    double header = 1.0 + static_cast<double>(varint_size(local_id));
    scan(g, s, [&](const Tuple& t, std::size_t k) {
        if (!gp.matches(t))
            return;
        double payload = ops.tuple_id ? id_size(g, k) : static_cast<double>(encode_key(pick(t, go)).size());
        st.requests.bytes += static_cast<double>(encode_key(pick(t, gk)).size()) + header + payload;
        st.requests.records += 1;
        st.output_bytes += ops.tuple_id ? id_size(g, k) + 1 : static_cast<double>(serialized_size(pick(t, go)));
    });

    const Relation& c = stats_relation(db, st.cond);
    st.cond_bytes = static_cast<double>(c.serialized_bytes());
    AtomPattern cp(eq.cond);
    auto ck = cp.positions(key);
    st.assert_sig = cp.signature() + "#";
    for (auto p : ck)
        st.assert_sig += std::to_string(p) + ",";
    scan(c, s, [&](const Tuple& t, std::size_t) {
        if (!cp.matches(t))
            return;
        st.asserts.bytes += static_cast<double>(encode_key(pick(t, ck)).size()) + 2;
        st.asserts.records += 1;
    });
    st.requests.bytes *= scale;
    st.requests.records *= scale;
    st.asserts.bytes *= scale;
    st.asserts.records *= scale;
    st.output_bytes *= scale;
    return st;
}

} // namespace

SgfStats compute_stats(const SgfQuery& q, const Database& db, const OperatorConfig& ops, const SampleConfig& s) {
    if (!(s.rate > 0 && s.rate <= 1))
        throw Error(ErrorCode::Config, "sample_rate must lie in (0, 1]");
    Database bounded = bound_database(db, q);
    SgfStats st;
    st.graph = dependency_graph(q);
    double scale = 1.0 / s.rate;
    for (const auto& b : q.queries) {
        NodeStats n;
        n.relations = b.mentioned_relations();
        n.guard = b.guard.relation;
        const Relation& g = stats_relation(bounded, n.guard);
        n.guard_bytes = static_cast<double>(g.serialized_bytes());
        if (b.condition) {
            ExtractedBsgf ex = extract_semijoins(b);
            for (std::size_t k = 0; k < ex.equations.size(); ++k)
                n.equations.push_back(equation_stats(bounded, ex.equations[k], k, ops, s));
        }
        AtomPattern gp(b.guard);
        auto gv = gp.positions(b.guard.variables()), go = gp.positions(b.out_vars);
        scan(g, s, [&](const Tuple& t, std::size_t k) {
            if (!gp.matches(t))
                return;
            Tuple out = pick(t, go);
            n.output_bytes += static_cast<double>(serialized_size(out));
            if (ops.tuple_id) {
                double id = id_size(g, k);
                n.guard_messages.bytes += id + 1 + static_cast<double>(encode_key(out).size());
                n.x_messages.bytes += id + 1;
                n.x_bytes += id + 1;
            } else {
                Tuple key = pick(t, gv);
                double kb = static_cast<double>(encode_key(key).size());
                n.guard_messages.bytes += kb + 1;
                n.x_messages.bytes += kb + 1;
                n.x_bytes += static_cast<double>(serialized_size(key));
            }
            n.guard_messages.records += 1;
            n.x_messages.records += 1;
        });
        n.output_bytes *= scale;
        n.guard_messages.bytes *= scale;
        n.guard_messages.records *= scale;
        n.x_messages.bytes *= scale;
        n.x_messages.records *= scale;
        n.x_bytes *= scale;
        st.nodes.push_back(std::move(n));
    }
    return st;
}

// ------------------------------------------------------------ BSGF grouping

namespace {

struct PartAccumulator {
    std::map<std::string, Extent> out; // relation -> (M bytes, M records)
    std::map<std::string, double> in;  // relation -> N bytes

    void add(const std::string& rel, double n_bytes, const Extent& m) {
        in[rel] = n_bytes;
        Extent& e = out[rel];
        e.bytes += m.bytes;
        e.records += m.records;
    }

    JobCostEstimate cost(double k_bytes, const CostConstants& c) const {
        std::vector<InputCostPart> parts;
        double m_total = 0;
        for (const auto& [rel, n] : in) {
            const Extent& e = out.at(rel);
            parts.push_back(make_part(n, e.bytes, e.records, c));
            m_total += parts.back().M;
        }
        return job_cost_gumbo(parts, c.mb(k_bytes), reducers_for(m_total, c), c);
    }
};

double sorted_sum(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    double s = 0;
    for (double x : v)
        s += x;
    return s;
}

bool positive_gain(double g, double scale) { return g > 1e-9 * std::max(1.0, std::abs(scale)); }

} // namespace

double block_cost(const std::vector<EquationStats>& eqs, const std::vector<std::size_t>& block,
                  const CostConstants& c) {
    PartAccumulator acc;
    std::set<std::string> seen_asserts;
    double k = 0;
    for (std::size_t i : block) {
        const EquationStats& e = eqs.at(i);
        acc.add(e.guard, e.guard_bytes, e.requests);
        acc.add(e.cond, e.cond_bytes, seen_asserts.insert(e.assert_sig).second ? e.asserts : Extent{});
        k += e.output_bytes;
    }
    return acc.cost(k, c).total;
}

double partition_cost(const std::vector<EquationStats>& eqs, const Partition& p, const CostConstants& c) {
    std::vector<double> costs;
    for (const auto& b : p)
        costs.push_back(block_cost(eqs, b, c));
    return sorted_sum(std::move(costs));
}

namespace {
std::vector<std::size_t> merged(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    std::vector<std::size_t> out;
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}
} // namespace

double gain(const std::vector<EquationStats>& eqs, const std::vector<std::size_t>& a,
            const std::vector<std::size_t>& b, const CostConstants& c) {
    return block_cost(eqs, a, c) + block_cost(eqs, b, c) - block_cost(eqs, merged(a, b), c);
}

Partition singleton_partition(std::size_t n) {
    Partition p;
    for (std::size_t i = 0; i < n; ++i)
        p.push_back({i});
    return p;
}

Partition greedy_bsgf(const std::vector<EquationStats>& eqs, const CostConstants& c) {
    Partition blocks = singleton_partition(eqs.size());
    std::map<std::vector<std::size_t>, double> cache;
    auto cost = [&](const std::vector<std::size_t>& b) {
        auto it = cache.find(b);
        if (it == cache.end())
            it = cache.emplace(b, block_cost(eqs, b, c)).first;
        return it->second;
    };
    for (;;) {
        double best = -std::numeric_limits<double>::infinity(), best_scale = 0;
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < blocks.size(); ++i)
            for (std::size_t j = i + 1; j < blocks.size(); ++j) {
                double ci = cost(blocks[i]), cj = cost(blocks[j]);
                double g = ci + cj - cost(merged(blocks[i], blocks[j]));
                if (g > best) {
                    best = g;
                    best_scale = ci + cj;
                    bi = i;
                    bj = j;
                }
            }
        if (blocks.size() < 2 || !positive_gain(best, best_scale))
            return blocks;
        blocks[bi] = merged(blocks[bi], blocks[bj]);
        blocks.erase(blocks.begin() + static_cast<std::ptrdiff_t>(bj));
    }
}

Partition brute_force_bsgf(const std::vector<EquationStats>& eqs, const CostConstants& c) {
    const std::size_t n = eqs.size();
    if (n > 12)
        throw Error(ErrorCode::TooLarge, "exhaustive grouping is limited to 12 equations, got " + std::to_string(n));
    if (n == 0)
        return {};
    std::vector<double> cache(std::size_t{1} << n, -1.0);
    auto mask_cost = [&](std::uint32_t mask) {
        double& slot = cache[mask];
        if (slot < 0) {
            std::vector<std::size_t> b;
            for (std::size_t i = 0; i < n; ++i)
                if (mask >> i & 1u)
                    b.push_back(i);
            slot = block_cost(eqs, b, c);
        }
        return slot;
    };

    // Restricted growth strings enumerate each set partition once.
    std::vector<std::size_t> rgs(n, 0), maxv(n, 0);
    std::vector<std::size_t> best_rgs;
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::uint32_t> masks;
    std::vector<double> costs;
    for (;;) {
        std::size_t blocks = 1 + *std::max_element(rgs.begin(), rgs.end());
        masks.assign(blocks, 0);
        for (std::size_t i = 0; i < n; ++i)
            masks[rgs[i]] |= 1u << i;
        costs.clear();
        for (auto m : masks)
            costs.push_back(mask_cost(m));
        double total = sorted_sum(costs);
        if (total < best) {
            best = total;
            best_rgs = rgs;
        }
        // next RGS
        std::size_t i = n - 1;
        while (i > 0 && rgs[i] == maxv[i - 1] + 1)
            --i;
        if (i == 0)
            break;
        ++rgs[i];
        maxv[i] = std::max(maxv[i - 1], rgs[i]);
        for (std::size_t k = i + 1; k < n; ++k) {
            rgs[k] = 0;
            maxv[k] = maxv[i];
        }
    }
    Partition p(1 + *std::max_element(best_rgs.begin(), best_rgs.end()));
    for (std::size_t i = 0; i < n; ++i)
        p[best_rgs[i]].push_back(i);
    return p;
}

double eval_stage_cost(const SgfStats& st, const std::vector<std::size_t>& nodes, const CostConstants& c) {
    PartAccumulator acc;
    double k = 0, projections = 0;
    bool any = false;
    for (std::size_t v : nodes) {
        const NodeStats& n = st.nodes.at(v);
        if (n.equations.empty()) {
            projections += job_cost_map_only({make_part(n.guard_bytes, 0, 0, c)}, c.mb(n.output_bytes), c).total;
            continue;
        }
        any = true;
        acc.add(n.guard, n.guard_bytes, n.guard_messages);
        for (const auto& e : n.equations)
            acc.add(e.name, n.x_bytes, n.x_messages);
        k += n.output_bytes;
    }
    return (any ? acc.cost(k, c).total : 0.0) + projections;
}

double bsgf_program_cost(const SgfStats& st, std::size_t node, const Partition& p, const CostConstants& c) {
    return eval_stage_cost(st, {node}, c) + partition_cost(st.nodes.at(node).equations, p, c);
}

// ------------------------------------------------------------- SGF staging

bool is_valid_sort(const DependencyGraph& g, const TopoSort& s) {
    std::vector<std::size_t> stage(g.nodes, g.nodes);
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i].empty())
            return false;
        for (std::size_t v : s[i]) {
            if (v >= g.nodes || stage[v] != g.nodes)
                return false;
            stage[v] = i;
        }
    }
    if (std::count(stage.begin(), stage.end(), g.nodes))
        return false;
    return std::all_of(g.edges.begin(), g.edges.end(), [&](const auto& e) { return stage[e.first] < stage[e.second]; });
}

std::size_t overlap(const SgfStats& st, std::size_t node, const std::vector<std::size_t>& stage) {
    std::set<std::string> there;
    for (std::size_t v : stage)
        there.insert(st.nodes.at(v).relations.begin(), st.nodes.at(v).relations.end());
    std::size_t n = 0;
    for (const auto& r : st.nodes.at(node).relations)
        n += there.count(r);
    return n;
}

TopoSort greedy_sgf(const SgfStats& st) {
    const DependencyGraph& g = st.graph;
    std::vector<bool> red(g.nodes, false);
    std::vector<std::size_t> stage_of(g.nodes, 0);
    TopoSort stages;
    for (std::size_t iter = 0; iter < g.nodes; ++iter) {
        std::vector<std::size_t> ready;
        for (std::size_t u = 0; u < g.nodes; ++u) {
            if (red[u])
                continue;
            auto preds = g.predecessors(u);
            if (std::all_of(preds.begin(), preds.end(), [&](std::size_t p) { return red[p]; }))
                ready.push_back(u);
        }
        std::size_t best_overlap = 0, best_u = 0, best_stage = 0;
        for (std::size_t u : ready) {
            auto preds = g.predecessors(u);
            for (std::size_t s = 0; s < stages.size(); ++s) {
                bool valid = std::all_of(preds.begin(), preds.end(), [&](std::size_t p) { return stage_of[p] < s; });
                if (!valid)
                    continue;
                std::size_t ov = overlap(st, u, stages[s]);
                if (ov > best_overlap) {
                    best_overlap = ov;
                    best_u = u;
                    best_stage = s;
                }
            }
        }
        if (best_overlap > 0) {
            stages[best_stage].push_back(best_u);
            std::sort(stages[best_stage].begin(), stages[best_stage].end());
            stage_of[best_u] = best_stage;
            red[best_u] = true;
        } else {
            std::size_t u = ready.front();
            stages.push_back({u});
            stage_of[u] = stages.size() - 1;
            red[u] = true;
        }
    }
    return stages;
}

TopoSort level_sort(const DependencyGraph& g) {
    std::vector<std::size_t> level(g.nodes, 0);
    for (std::size_t v = 0; v < g.nodes; ++v) // edges go from lower to higher index
        for (std::size_t p : g.predecessors(v))
            level[v] = std::max(level[v], level[p] + 1);
    TopoSort out;
    for (std::size_t v = 0; v < g.nodes; ++v) {
        if (out.size() <= level[v])
            out.resize(level[v] + 1);
        out[level[v]].push_back(v);
    }
    return out;
}

double stage_cost(const SgfStats& st, const std::vector<std::size_t>& stage, const CostConstants& c) {
    std::vector<EquationStats> pool;
    for (std::size_t v : stage)
        pool.insert(pool.end(), st.nodes.at(v).equations.begin(), st.nodes.at(v).equations.end());
    return eval_stage_cost(st, stage, c) + partition_cost(pool, greedy_bsgf(pool, c), c);
}

double sgf_plan_cost(const SgfStats& st, const TopoSort& sort, const CostConstants& c) {
    std::vector<double> costs;
    for (const auto& s : sort)
        costs.push_back(stage_cost(st, s, c));
    return sorted_sum(std::move(costs));
}

namespace {

// Canonical stage order for a block assignment, or nothing when the blocks
// cannot be ordered (an edge inside a block or a cycle between blocks).
std::optional<TopoSort> order_blocks(const DependencyGraph& g, const std::vector<std::size_t>& block_of,
                                     std::size_t blocks) {
    std::vector<std::set<std::size_t>> preds(blocks);
    for (const auto& [u, v] : g.edges) {
        if (block_of[u] == block_of[v])
            return std::nullopt;
        preds[block_of[v]].insert(block_of[u]);
    }
    TopoSort out;
    std::vector<bool> placed(blocks, false);
    for (std::size_t step = 0; step < blocks; ++step) {
        std::size_t pick = blocks;
        for (std::size_t b = 0; b < blocks && pick == blocks; ++b) // blocks are numbered by first node
            if (!placed[b] && std::all_of(preds[b].begin(), preds[b].end(), [&](std::size_t p) { return placed[p]; }))
                pick = b;
        if (pick == blocks)
            return std::nullopt;
        placed[pick] = true;
        std::vector<std::size_t> stage;
        for (std::size_t v = 0; v < g.nodes; ++v)
            if (block_of[v] == pick)
                stage.push_back(v);
        out.push_back(std::move(stage));
    }
    return out;
}

template <class Fn>
void for_each_set_partition(std::size_t n, Fn fn) {
    if (n == 0)
        return;
    std::vector<std::size_t> rgs(n, 0), maxv(n, 0);
    for (;;) {
        fn(rgs, 1 + *std::max_element(rgs.begin(), rgs.end()));
        std::size_t i = n - 1;
        while (i > 0 && rgs[i] == maxv[i - 1] + 1)
            --i;
        if (i == 0)
            return;
        ++rgs[i];
        maxv[i] = std::max(maxv[i - 1], rgs[i]);
        for (std::size_t k = i + 1; k < n; ++k) {
            rgs[k] = 0;
            maxv[k] = maxv[i];
        }
    }
}

} // namespace

std::vector<TopoSort> candidate_sorts(const DependencyGraph& g) {
    std::vector<TopoSort> out;
    for_each_set_partition(g.nodes, [&](const std::vector<std::size_t>& rgs, std::size_t blocks) {
        if (auto s = order_blocks(g, rgs, blocks))
            out.push_back(std::move(*s));
    });
    return out;
}

std::vector<TopoSort> ordered_sorts(const DependencyGraph& g) {
    std::vector<TopoSort> out;
    for (const TopoSort& base : candidate_sorts(g)) {
        std::vector<std::size_t> perm(base.size());
        for (std::size_t i = 0; i < perm.size(); ++i)
            perm[i] = i;
        do {
            TopoSort s;
            for (std::size_t i : perm)
                s.push_back(base[i]);
            if (is_valid_sort(g, s))
                out.push_back(std::move(s));
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    return out;
}

TopoSort brute_force_sgf(const SgfStats& st, const CostConstants& c) {
    if (st.graph.nodes > 8)
        throw Error(ErrorCode::TooLarge,
                    "exhaustive staging is limited to 8 queries, got " + std::to_string(st.graph.nodes));
    std::map<std::vector<std::size_t>, double> cache;
    TopoSort best;
    double best_cost = std::numeric_limits<double>::infinity();
    for (const TopoSort& s : candidate_sorts(st.graph)) {
        std::vector<double> costs;
        for (const auto& stage : s) {
            auto it = cache.find(stage);
            if (it == cache.end())
                it = cache.emplace(stage, stage_cost(st, stage, c)).first;
            costs.push_back(it->second);
        }
        double total = sorted_sum(std::move(costs));
        if (total < best_cost) {
            best_cost = total;
            best = s;
        }
    }
    return best;
}

// --------------------------------------------------------------- compilation

namespace {

Atom over(const std::string& relation, const std::vector<std::string>& vars) {
    Atom a{relation, {}, {}};
    for (const auto& v : vars)
        a.terms.push_back(Term::variable(v));
    return a;
}

void flatten(const ConditionPtr& c, Condition::Kind kind, std::vector<ConditionPtr>& out) {
    if (c->kind() == kind) {
        flatten(c->lhs(), kind, out);
        flatten(c->rhs(), kind, out);
    } else {
        out.push_back(c);
    }
}

struct Literal {
    Atom atom;
    bool negated;
};

// Disjunction of conjunctions of literals, or nothing for other shapes.
std::optional<std::vector<std::vector<Literal>>> as_dnf(const ConditionPtr& c) {
    std::vector<ConditionPtr> disjuncts;
    flatten(c, Condition::Kind::Or, disjuncts);
    std::vector<std::vector<Literal>> out;
    for (const auto& d : disjuncts) {
        std::vector<ConditionPtr> lits;
        flatten(d, Condition::Kind::And, lits);
        std::vector<Literal> conj;
        for (const auto& l : lits) {
            if (l->kind() == Condition::Kind::Leaf)
                conj.push_back({l->atom(), false});
            else if (l->kind() == Condition::Kind::Not && l->child()->kind() == Condition::Kind::Leaf)
                conj.push_back({l->child()->atom(), true});
            else
                return std::nullopt;
        }
        out.push_back(std::move(conj));
    }
    return out;
}

using Partitioner = std::function<Partition(const std::vector<EquationStats>&)>;

class Compiler {
public:
    Compiler(const SgfQuery& q, const PlanOptions& opt, const SgfStats& stats) : q_(q), opt_(opt), stats_(stats) {
        plan_.strategy = opt.strategy;
    }

    // Jobs of a stage start only after every job of the previous stage.
    void add(JobSpec job, std::size_t stage) {
        if (stage != stage_) {
            previous_ = std::move(current_);
            current_.clear();
            stage_ = stage;
        }
        char buf[16];
        std::snprintf(buf, sizeof buf, "J%02zu", plan_.dag.jobs.size() + 1);
        job.id = buf;
        job.after = previous_;
        current_.push_back(job.id);
        plan_.dag.jobs.push_back(std::move(job));
        plan_.job_stage.push_back(stage);
    }

    void warn_empty_keys(const std::vector<SemiJoinEquation>& eqs) {
        for (const auto& e : eqs)
            if (e.key().empty())
                plan_.warnings.push_back(e.output + ": empty join key, all messages meet in one reduce group");
    }

    // MSJ jobs from a partition of the stage's pooled equations, then EVAL.
    void msj_stage(const std::vector<std::size_t>& nodes, const Partitioner& partition, bool eval_per_node) {
        std::size_t s = plan_.stages.size();
        StagePlan sp{nodes, {}};
        std::vector<SemiJoinEquation> pool;
        std::vector<EquationStats> pool_stats;
        std::vector<EvalEntry> entries;
        for (std::size_t v : nodes) {
            const BsgfQuery& b = q_[v];
            if (!b.condition) {
                add(build_projection_job("", b), s);
                continue;
            }
            ExtractedBsgf ex = extract_semijoins(b);
            EvalEntry en{b.output, b.out_vars, b.guard, {}, ex.phi};
            for (const auto& e : ex.equations)
                en.inputs.push_back(e.output);
            entries.push_back(std::move(en));
            pool.insert(pool.end(), ex.equations.begin(), ex.equations.end());
            pool_stats.insert(pool_stats.end(), stats_.nodes[v].equations.begin(), stats_.nodes[v].equations.end());
        }
        warn_empty_keys(pool);
        if (!pool.empty()) {
            for (const auto& block : partition(pool_stats)) {
                std::vector<SemiJoinEquation> eqs;
                std::vector<std::string> names;
                for (std::size_t i : block) {
                    eqs.push_back(pool[i]);
                    names.push_back(pool[i].output);
                }
                add(build_msj_job("", eqs, opt_.ops), s);
                sp.blocks.push_back(std::move(names));
            }
            if (eval_per_node) {
                for (auto& en : entries)
                    add(build_eval_job("", {en}, opt_.ops), s);
            } else {
                add(build_eval_job("", entries, opt_.ops), s);
            }
        }
        plan_.stages.push_back(std::move(sp));
    }

    void one_round_stage(const std::vector<std::size_t>& nodes) {
        std::size_t s = plan_.stages.size();
        StagePlan sp{nodes, {}};
        OperatorConfig ops = opt_.ops;
        ops.tuple_id = false;
        for (std::size_t v : nodes) {
            const BsgfQuery& b = q_[v];
            if (!b.condition) {
                add(build_projection_job("", b), s);
                continue;
            }
            if (!one_round_eligible(b))
                throw Error(ErrorCode::StrategyInapplicable,
                            "ONE_ROUND: conditional atoms of " + b.output + " use different join keys");
            add(build_one_round_job("", b, ops), s);
            sp.blocks.push_back({b.output});
        }
        plan_.stages.push_back(std::move(sp));
    }

    void seq_stage(const std::vector<std::size_t>& nodes) {
        std::size_t s = plan_.stages.size();
        StagePlan sp{nodes, {}};
        OperatorConfig ops = opt_.ops;
        ops.tuple_id = false;
        for (std::size_t v : nodes) {
            const BsgfQuery& b = q_[v];
            if (!b.condition) {
                add(build_projection_job("", b), s);
                continue;
            }
            auto dnf = as_dnf(b.condition);
            if (!dnf)
                throw Error(ErrorCode::StrategyInapplicable,
                            "SEQ: condition of " + b.output + " is not a disjunction of conjunctions of literals");
            std::vector<std::string> gvars = b.guard.variables();
            bool single = dnf->size() == 1;
            EvalEntry uni{b.output, b.out_vars, b.guard, {}, nullptr};
            for (std::size_t d = 0; d < dnf->size(); ++d) {
                const auto& conj = (*dnf)[d];
                Atom current = b.guard;
                for (std::size_t k = 0; k < conj.size(); ++k) {
                    bool last = k + 1 == conj.size();
                    SemiJoinEquation eq;
                    eq.output = last && single ? b.output
                                               : b.output + ".s" + std::to_string(d + 1) + "." + std::to_string(k + 1);
                    eq.out_vars = last && single ? b.out_vars : gvars;
                    eq.guard = current;
                    eq.cond = conj[k].atom;
                    eq.anti = conj[k].negated;
                    warn_empty_keys({eq});
                    add(build_msj_job("", {eq}, ops), s);
                    sp.blocks.push_back({eq.output});
                    current = over(eq.output, gvars);
                }
                if (!single) {
                    FormulaPtr var = Formula::var(uni.inputs.size());
                    uni.phi = uni.phi ? Formula::disj(uni.phi, var) : var;
                    uni.inputs.push_back(current.relation);
                }
            }
            if (!single)
                add(build_eval_job("", {uni}, ops), s);
        }
        plan_.stages.push_back(std::move(sp));
    }

    Plan finish() { return std::move(plan_); }

private:
    const SgfQuery& q_;
    const PlanOptions& opt_;
    const SgfStats& stats_;
    Plan plan_;
    std::size_t stage_ = 0;
    std::vector<std::string> previous_, current_;
};

} // namespace

Plan build_plan(const SgfQuery& q, const Database& db, const PlanOptions& opt) {
    require_valid(q);
    opt.cost.check();
    SgfStats stats = compute_stats(q, db, opt.ops, opt.sample);
    const CostConstants& c = opt.cost;
    Compiler comp(q, opt, stats);

    Partitioner singletons = [](const std::vector<EquationStats>& eqs) { return singleton_partition(eqs.size()); };
    Partitioner greedy = [&](const std::vector<EquationStats>& eqs) { return greedy_bsgf(eqs, c); };
    Partitioner exhaustive = [&](const std::vector<EquationStats>& eqs) {
        if (eqs.size() > 12)
            throw Error(ErrorCode::StrategyInapplicable,
                        "OPT_BSGF: " + std::to_string(eqs.size()) + " equations in one stage exceed the limit of 12");
        return brute_force_bsgf(eqs, c);
    };

    TopoSort stages;
    switch (opt.strategy) {
    case Strategy::SeqUnit:
        for (std::size_t v = 0; v < q.size(); ++v)
            stages.push_back({v});
        break;
    case Strategy::GreedySgf: stages = greedy_sgf(stats); break;
    case Strategy::OptSgf:
        if (q.size() > 8)
            throw Error(ErrorCode::StrategyInapplicable, "OPT_SGF: more than 8 queries");
        stages = brute_force_sgf(stats, c);
        break;
    default: stages = level_sort(stats.graph); break;
    }

    for (const auto& stage : stages) {
        switch (opt.strategy) {
        case Strategy::Seq: comp.seq_stage(stage); break;
        case Strategy::OneRound: comp.one_round_stage(stage); break;
        case Strategy::Par:
        case Strategy::SeqUnit: comp.msj_stage(stage, singletons, false); break;
        case Strategy::ParUnit: comp.msj_stage(stage, singletons, true); break;
        case Strategy::Greedy:
        case Strategy::GreedySgf:
        case Strategy::OptSgf: comp.msj_stage(stage, greedy, false); break;
        case Strategy::OptBsgf: comp.msj_stage(stage, exhaustive, false); break;
        }
    }
    Plan plan = comp.finish();
    plan.estimated_cost = annotate_estimates(plan.dag, db, c, opt.sample);
    return plan;
}

} // namespace sgf
