// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "sgf/analysis.hpp"
#include "sgf/cost_model.hpp"
#include "sgf/error.hpp"
#include "sgf/operators.hpp"
#include "sgf/parser.hpp"
#include "sgf/planner.hpp"
#include "sgf/reference_eval.hpp"
#include "sgf/templates.hpp"
#include "sgf/workbench.hpp"

#include "subset_sum.hpp"
#include "planner_support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace sgf;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string& what) {
        if (!ok && pass) {
            pass = false;
            detail.str("");
            detail << what;
        }
    }
};

const std::vector<std::string> kTemplates{"A1", "A2", "A3", "A4", "A5", "B1", "B2", "C1", "C2", "C3", "C4"};
const std::vector<Strategy> kRunStrategies{Strategy::Seq,     Strategy::Par,    Strategy::Greedy,   Strategy::OneRound,
                                           Strategy::SeqUnit, Strategy::ParUnit, Strategy::GreedySgf};

WorkloadSpec desk(const std::string& id, double selectivity = 0.5, std::size_t tuples = 10000) {
    WorkloadSpec s;
    s.template_id = id;
    s.guard_tuples = s.conditional_tuples = tuples;
    s.selectivity = selectivity;
    return s;
}

double round_input(const PlanMetrics& m, std::size_t round) {
    double sum = 0;
    for (const auto& j : m.jobs)
        if (j.round == round)
            sum += j.input_bytes;
    return sum;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void oracle_equivalence(Outcome& o) {
    std::size_t runs = 0, skipped = 0;
    for (const auto& id : kTemplates)
        for (double sel : {0.1, 0.5, 0.9}) {
            WorkloadSpec spec = desk(id, sel);
            SgfQuery q = workload_query(spec);
            Database db = gen_data(spec);
            SgfEvaluation oracle = eval_sgf(db, q);
            std::size_t applicable = 0;
            for (Strategy s : kRunStrategies) {
                RunReport r = run_strategy(q, db, s, WorkbenchConfig{}, oracle);
                if (!r.applicable) {
                    ++skipped;
                    continue;
                }
                ++applicable;
                ++runs;
                o.check(r.ok && r.oracle_match,
                        id + " sel=" + fmt(sel) + " " + r.strategy + (r.ok ? ": output differs" : ": " + r.error));
            }
            o.check(applicable >= 5, id + ": fewer than 5 applicable strategies");
        }
    if (o.pass)
        o.detail << runs << " runs match, " << skipped << " inapplicable";
}

void subset_sum_identity(Outcome& o) {
    test::SubsetSumInstance inst = test::subset_sum_instance({2, 3, 5, 7});
    SgfStats st = compute_stats(inst.query, inst.db, OperatorConfig{}, SampleConfig{});
    const CostConstants& c = inst.cost;
    const std::size_t fc = 4;
    const std::vector<double> a{2, 3, 5, 7};
    // Optimal grouping of a stage's pooled equations.
    auto gopt = [&](const std::vector<std::size_t>& stage) {
        std::vector<EquationStats> pool;
        for (std::size_t v : stage)
            pool.insert(pool.end(), st.nodes[v].equations.begin(), st.nodes[v].equations.end());
        return partition_cost(pool, brute_force_bsgf(pool, c), c) + eval_stage_cost(st, stage, c);
    };
    o.check(inst.gamma == 17, "gamma != 17");
    for (std::size_t i = 0; i < 4; ++i) {
        o.check(gopt({i}) == a[i], "cost({f_" + std::to_string(i + 1) + "}) = " + fmt(gopt({i})));
        o.check(stage_cost(st, {i}, c) == a[i], "greedy stage cost of f_" + std::to_string(i + 1));
        o.check(gopt({i, fc}) == 17, "cost({f_i, f_c}) = " + fmt(gopt({i, fc})));
        for (std::size_t j = i + 1; j < 4; ++j)
            o.check(gopt({i, j}) == a[i] + a[j], "pair cost " + fmt(gopt({i, j})));
    }
    o.check(gopt({fc}) == 17, "cost({f_c}) != 17");
    o.check(gopt({0, 1, 2, 3, fc}) == 17, "cost of all queries != 17");
    if (o.pass)
        o.detail << "singletons a_i, pairs a_i+a_j, blocks with f_c = 17";
}

void optimality_bounds(Outcome& o) {
    std::mt19937 rng(2024);
    std::size_t violations = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 1 + rng() % 8;
        auto eqs = test::random_equations(rng, n);
        CostConstants c;
        c.cost_h = std::vector<double>{0, 5, 50}[trial % 3];
        double best = partition_cost(eqs, brute_force_bsgf(eqs, c), c);
        double greedy = partition_cost(eqs, greedy_bsgf(eqs, c), c);
        double trivial = partition_cost(eqs, singleton_partition(n), c);
        if (!(best <= greedy + 1e-9 && greedy <= trivial + 1e-9)) {
            ++violations;
            o.check(false, "BSGF trial " + std::to_string(trial) + ": " + fmt(best) + " / " + fmt(greedy) + " / " +
                               fmt(trivial));
        }
    }
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = 1 + rng() % 6;
        SgfQuery q = test::random_dag(rng, n);
        Database db = test::random_db(rng, {{"R", 2}, {"S", 1}, {"T", 1}, {"U", 1}}, 20 + rng() % 400,
                                      10 + static_cast<int>(rng() % 200));
        SgfStats st = compute_stats(q, db, OperatorConfig{}, SampleConfig{});
        CostConstants c;
        double best = sgf_plan_cost(st, brute_force_sgf(st, c), c);
        double greedy = sgf_plan_cost(st, greedy_sgf(st), c);
        if (!(best <= greedy + 1e-9)) {
            ++violations;
            o.check(false, "SGF trial " + std::to_string(trial) + ": " + fmt(best) + " > " + fmt(greedy));
        }
    }
    if (o.pass)
        o.detail << "200 BSGF + 100 SGF instances, " << violations << " violations";
}

void branched_chain_enumeration(Outcome& o) {
    SgfQuery q = parse_program(R"(
        Z1 := SELECT x, y FROM R1(x,y) WHERE S(x);
        Z2 := SELECT x, y FROM Z1(x,y) WHERE T(x);
        Z3 := SELECT x, y FROM Z2(x,y) WHERE U(x);
        Z4 := SELECT x, y FROM R2(x,y) WHERE T(x);
        Z5 := SELECT x, y FROM Z3(x,y) WHERE Z4(x,x);
    )");
    DependencyGraph g = dependency_graph(q);
    std::size_t n = candidate_sorts(g).size();
    o.check(n == 4, "enumerated " + std::to_string(n) + " sorts");
    for (const auto& s : candidate_sorts(g))
        o.check(is_valid_sort(g, s), "invalid candidate sort");
    if (o.pass)
        o.detail << n << " multiway topological sorts";
}

void cost_refinement(Outcome& o) {
    CostConstants c;
    // Filter-query shape: the first input's map output is 48 times its size,
    // the others emit nothing.
    double n = 1024 * test::kMB;
    std::vector<InputCostPart> parts{make_part(n, 48 * n, 48e6, c), make_part(n, 0, 0, c), make_part(n, 0, 0, c)};
    double K = 1024, r = reducers_for(48 * 1024, c); // MB
    JobCostEstimate g = job_cost_gumbo(parts, K, r, c), w = job_cost_wang(parts, K, r, c);
    o.check(g.total != w.total, "gumbo and wang agree on the skewed job");
    // Wang's pooled merge cost, all of it attributed to the only part with output.
    InputCostPart pooled{0, 0, 0, 0};
    for (const auto& p : parts) {
        pooled.N += p.N;
        pooled.M += p.M;
        pooled.M_meta += p.M_meta;
        pooled.m += p.m;
    }
    double wang_merge = map_merge_cost(pooled, c);
    o.check(std::abs(w.map - (c.h_r * pooled.N + wang_merge + c.l_w * pooled.M)) < 1e-6, "wang map decomposition");
    double gumbo_merge = map_merge_cost(parts[0], c);
    o.check(gumbo_merge > wang_merge, "amplified part merge " + fmt(gumbo_merge) + " <= pooled " + fmt(wang_merge));

    std::mt19937 rng(5);
    std::uniform_real_distribution<double> mb(0.01, 20000);
    double worst = 0;
    for (int i = 0; i < 500; ++i) {
        std::vector<InputCostPart> one{make_part(mb(rng) * test::kMB, mb(rng) * test::kMB, 1e5, c)};
        double k = mb(rng), red = 1 + rng() % 64;
        double a = job_cost_gumbo(one, k, red, c).total, b = job_cost_wang(one, k, red, c).total;
        worst = std::max(worst, std::abs(a - b) / std::max(std::abs(a), 1e-300));
    }
    o.check(worst <= 1e-9, "single-part relative difference " + fmt(worst));
    if (o.pass)
        o.detail << "skewed: gumbo " << fmt(g.total) << " vs wang " << fmt(w.total) << ", merge "
                 << fmt(gumbo_merge) << " > " << fmt(wang_merge) << "; single part max rel diff " << fmt(worst);
}

void grouping_io(Outcome& o) {
    WorkloadSpec a1 = desk("A1");
    SgfQuery q1 = workload_query(a1);
    Database db1 = gen_data(a1);
    auto rows = compare(q1, db1, {Strategy::Par, Strategy::Greedy}, WorkbenchConfig{});
    for (const auto& r : rows)
        o.check(r.ok && r.oracle_match, "A1 " + r.strategy + " failed: " + r.error);
    if (!o.pass)
        return;
    double guard = db1.at("R").serialized_bytes();
    double par = round_input(rows[0].metrics, 1), greedy = round_input(rows[1].metrics, 1);
    double eps = 0.01 * par;
    o.check(greedy <= par - 3 * guard + eps,
            "A1 round-1 input GREEDY " + fmt(greedy) + " vs PAR " + fmt(par) + " |R| " + fmt(guard));

    WorkloadSpec a3 = desk("A3");
    SgfQuery q3 = workload_query(a3);
    Database db3 = gen_data(a3);
    auto rows3 = compare(q3, db3, {Strategy::Par, Strategy::Greedy}, WorkbenchConfig{});
    double sp = rows3[0].metrics.shuffle_bytes, sg = rows3[1].metrics.shuffle_bytes;
    o.check(rows3[0].oracle_match && rows3[1].oracle_match, "A3 oracle mismatch");
    o.check(sg < sp, "A3 shuffle GREEDY " + fmt(sg) + " >= PAR " + fmt(sp));
    if (o.pass)
        o.detail << "A1 round-1 input " << fmt(greedy) << " vs " << fmt(par) << " (|R| = " << fmt(guard)
                 << "); A3 shuffle " << fmt(sg) << " < " << fmt(sp);
}

void packing_tuple_id(Outcome& o) {
    std::size_t runs = 0;
    for (const auto& id : kTemplates) {
        WorkloadSpec spec = desk(id, 0.5, 2000);
        SgfQuery q = workload_query(spec);
        Database db = gen_data(spec);
        SgfEvaluation oracle = eval_sgf(db, q);
        for (Strategy s : kRunStrategies) {
            // [packing][tuple_id]
            RunReport r[2][2];
            bool applicable = true;
            for (int p = 0; p < 2; ++p)
                for (int t = 0; t < 2; ++t) {
                    WorkbenchConfig cfg;
                    cfg.plan.ops.packing = p;
                    cfg.plan.ops.tuple_id = t;
                    r[p][t] = run_strategy(q, db, s, cfg, oracle);
                    applicable = applicable && r[p][t].applicable;
                }
            if (!applicable)
                continue;
            std::string tag = id + " " + std::string(to_string(s));
            for (int p = 0; p < 2; ++p)
                for (int t = 0; t < 2; ++t) {
                    o.check(r[p][t].ok && r[p][t].oracle_match, tag + " output changed");
                    o.check(r[p][t].checksum == r[0][0].checksum, tag + " checksum changed");
                }
            for (int t = 0; t < 2; ++t)
                o.check(r[1][t].metrics.map_output_records <= r[0][t].metrics.map_output_records,
                        tag + " packing increased map records " + fmt(r[0][t].metrics.map_output_records) + " -> " +
                            fmt(r[1][t].metrics.map_output_records));
            for (int p = 0; p < 2; ++p)
                o.check(r[p][1].metrics.shuffle_bytes <= r[p][0].metrics.shuffle_bytes,
                        tag + " tuple id increased shuffle bytes " + fmt(r[p][0].metrics.shuffle_bytes) + " -> " +
                            fmt(r[p][1].metrics.shuffle_bytes));
            ++runs;
        }
    }
    if (o.pass)
        o.detail << runs << " template/strategy runs x 4 flag settings";
}

void determinism(Outcome& o) {
    std::size_t runs = 0;
    for (const auto& id : {"A1", "A5", "B2", "C2", "C3", "C4"}) {
        WorkloadSpec spec = desk(id, 0.5, 5000);
        SgfQuery q = workload_query(spec);
        Database db = gen_data(spec);
        for (Strategy s : {Strategy::Seq, Strategy::Par, Strategy::Greedy, Strategy::GreedySgf}) {
            std::string metrics0;
            Database out0;
            for (std::size_t threads : {1, 2, 8}) {
                WorkbenchConfig cfg;
                cfg.runtime.threads = threads;
                cfg.runtime.map_tasks = 0;
                Execution ex;
                try {
                    ex = execute(q, db, s, cfg);
                } catch (const Error& e) {
                    if (e.code() == ErrorCode::StrategyInapplicable)
                        break;
                    throw;
                }
                std::string m = ex.metrics.to_json();
                if (threads == 1) {
                    metrics0 = m;
                    out0 = ex.database;
                    ++runs;
                    continue;
                }
                std::string tag = std::string(id) + " " + std::string(to_string(s)) + " threads=" +
                                  std::to_string(threads);
                o.check(m == metrics0, tag + ": metrics differ");
                for (const auto& b : q.queries)
                    o.check(ex.database.at(b.output).tuples() == out0.at(b.output).tuples(), tag + ": output differs");
            }
        }
    }
    if (o.pass)
        o.detail << runs << " plans identical at 1, 2 and 8 threads";
}

void conformance_vectors(Outcome& o) {
    SgfQuery pattern = parse_program("Tmp := SELECT x, y FROM R(x,2,x,y);");
    const Atom& a = pattern[0].guard;
    Fact f{"R", {"1", "2", "1", "3"}};
    o.check(conforms(f, a), "(1,2,1,3) does not conform to (x,2,x,y)");
    o.check(project(f, a, {"x", "y"}) == Tuple{"1", "3"}, "projection is not (1,3)");
    o.check(!conforms(Fact{"R", {"1", "2", "2", "3"}}, a), "(1,2,2,3) conforms");
    o.check(!conforms(Fact{"R", {"1", "5", "1", "3"}}, a), "(1,5,1,3) conforms");

    Database db;
    db.put("R", Relation(2, {{"1", "2"}, {"4", "5"}}));
    db.put("S", Relation(2, {{"2", "3"}}));
    SgfQuery q = parse_program("Z := SELECT x FROM R(x,y) WHERE S(y,z);");
    Relation expected(1, {{"1"}});
    o.check(eval_sgf(db, q).final_relation() == expected, "reference result is not {Z(1)}");
    for (Strategy s : {Strategy::Par, Strategy::Greedy, Strategy::OneRound}) {
        PlanOptions opt;
        opt.strategy = s;
        Plan p = build_plan(q, db, opt);
        o.check(run_plan(db, p.dag, RuntimeConfig{}).database.at("Z") == expected,
                std::string(to_string(s)) + " result is not {Z(1)}");
    }
    if (o.pass)
        o.detail << "conformance, projection (1,3), semi-join run {Z(1)}";
}

void one_round(Outcome& o) {
    BsgfQuery a3 = parse_program(template_text("A3"))[0];
    BsgfQuery b2 = parse_program(template_text("B2"))[0];
    BsgfQuery disjunctive = parse_program("Q := SELECT x, y FROM R(x,y) WHERE (S(x,y) OR S(y,x)) AND T(x,z);")[0];
    o.check(one_round_eligible(a3), "A3 not eligible");
    o.check(one_round_eligible(b2), "B2 not eligible");
    o.check(!one_round_eligible(disjunctive), "disjunctive two-key query eligible");

    WorkloadSpec spec = desk("A3");
    SgfQuery q = workload_query(spec);
    Database db = gen_data(spec);
    for (double cost_h : {0.0, 5.0, 50.0}) {
        WorkbenchConfig cfg;
        cfg.plan.cost.cost_h = cost_h;
        auto rows = compare(q, db, {Strategy::OneRound, Strategy::Greedy}, cfg);
        const RunReport &one = rows[0], &greedy = rows[1];
        std::string tag = "cost_h=" + fmt(cost_h) + ": ";
        o.check(one.ok && one.oracle_match && greedy.ok && greedy.oracle_match, tag + "run failed");
        if (!o.pass)
            return;
        o.check(one.metrics.jobs.size() == 1 && one.metrics.rounds.size() == 1, tag + "ONE_ROUND is not 1 job/1 round");
        o.check(greedy.metrics.rounds.size() == 2, tag + "GREEDY is not 2 rounds");
        o.check(one.metrics.total_cost < greedy.metrics.total_cost,
                tag + "measured " + fmt(one.metrics.total_cost) + " >= " + fmt(greedy.metrics.total_cost));
        o.check(one.estimated_cost < greedy.estimated_cost,
                tag + "estimated " + fmt(one.estimated_cost) + " >= " + fmt(greedy.estimated_cost));
        if (cost_h == 5.0 && o.pass)
            o.detail << "cost_h=5: ONE_ROUND " << fmt(one.metrics.total_cost) << " < GREEDY "
                     << fmt(greedy.metrics.total_cost);
    }
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
        {"oracle equivalence", oracle_equivalence},
        {"subset-sum cost identity", subset_sum_identity},
        {"optimality bounds", optimality_bounds},
        {"multiway sort enumeration", branched_chain_enumeration},
        {"per-input cost model", cost_refinement},
        {"grouping reduces I/O", grouping_io},
        {"packing and tuple-id", packing_tuple_id},
        {"thread determinism", determinism},
        {"conformance and projection", conformance_vectors},
        {"one-round eligibility", one_round},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        auto start = std::chrono::steady_clock::now();
        try {
            criteria[i].second(o);
        } catch (const std::exception& e) {
            o.check(false, std::string("exception: ") + e.what());
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s %2zu %-28s %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    o.detail.str().c_str(), secs);
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed ? 1 : 0;
}
