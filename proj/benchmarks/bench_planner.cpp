#include "sgf/parser.hpp"
#include "sgf/planner.hpp"
#include "sgf/workbench.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace sgf;

namespace {

std::vector<EquationStats> equations(std::size_t n, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> mb(1, 4096);
    std::vector<EquationStats> eqs;
    for (std::size_t i = 0; i < n; ++i) {
        EquationStats e;
        e.name = "e" + std::to_string(i);
        e.guard = rng() % 2 ? "R" : "G";
        e.guard_bytes = e.requests.bytes = (e.guard == "R" ? 4096 : 2048) * 1048576.0;
        e.cond = std::string(1, "STUVW"[rng() % 5]);
        e.assert_sig = e.cond;
        e.cond_bytes = e.asserts.bytes = mb(rng) * 1048576.0;
        e.output_bytes = e.guard_bytes;
        eqs.push_back(e);
    }
    return eqs;
}

// Chain-free random DAG of n single-conditional queries.
SgfQuery random_dag(std::size_t n, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::string text;
    for (std::size_t i = 0; i < n; ++i) {
        std::string guard = i && rng() % 2 ? "Z" + std::to_string(rng() % i) : "R";
        text += "Z" + std::to_string(i) + " := SELECT x, y FROM " + guard + "(x,y) WHERE " +
                std::string(1, "STU"[rng() % 3]) + "(x);\n";
    }
    return parse_program(text);
}

Database dag_db() {
    Database db;
    std::vector<Tuple> r, s;
    for (int i = 0; i < 200; ++i) {
        r.push_back({std::to_string(i), std::to_string(i * 7 % 200)});
        s.push_back({std::to_string(i * 3)});
    }
    db.put("R", Relation(2, r));
    for (const char* name : {"S", "T", "U"})
        db.put(name, Relation(1, s));
    return db;
}

} // namespace

static void BM_GreedyBsgf(benchmark::State& state) {
    auto eqs = equations(static_cast<std::size_t>(state.range(0)), 1);
    CostConstants c;
    for (auto _ : state)
        benchmark::DoNotOptimize(greedy_bsgf(eqs, c));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GreedyBsgf)->RangeMultiplier(2)->Range(2, 64)->Complexity();

static void BM_BruteForceBsgf(benchmark::State& state) {
    auto eqs = equations(static_cast<std::size_t>(state.range(0)), 1);
    CostConstants c;
    for (auto _ : state)
        benchmark::DoNotOptimize(brute_force_bsgf(eqs, c));
}
BENCHMARK(BM_BruteForceBsgf)->DenseRange(2, 9)->Unit(benchmark::kMillisecond);

static void BM_GreedySgf(benchmark::State& state) {
    std::size_t n = static_cast<std::size_t>(state.range(0));
    SgfStats st = compute_stats(random_dag(n, 3), dag_db(), OperatorConfig{}, SampleConfig{});
    for (auto _ : state)
        benchmark::DoNotOptimize(greedy_sgf(st));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GreedySgf)->RangeMultiplier(2)->Range(4, 64)->Complexity(benchmark::oNCubed);

static void BM_BruteForceSgf(benchmark::State& state) {
    std::size_t n = static_cast<std::size_t>(state.range(0));
    SgfStats st = compute_stats(random_dag(n, 3), dag_db(), OperatorConfig{}, SampleConfig{});
    CostConstants c;
    for (auto _ : state)
        benchmark::DoNotOptimize(brute_force_sgf(st, c));
}
BENCHMARK(BM_BruteForceSgf)->DenseRange(2, 6)->Unit(benchmark::kMillisecond);

static void BM_BuildPlan(benchmark::State& state) {
    WorkloadSpec spec;
    spec.template_id = "C4";
    spec.guard_tuples = spec.conditional_tuples = 2000;
    SgfQuery q = workload_query(spec);
    Database db = gen_data(spec);
    PlanOptions opt;
    opt.strategy = static_cast<Strategy>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(build_plan(q, db, opt));
    state.SetLabel(std::string(to_string(opt.strategy)));
}
BENCHMARK(BM_BuildPlan)
    ->Arg(static_cast<int>(Strategy::Par))
    ->Arg(static_cast<int>(Strategy::Greedy))
    ->Arg(static_cast<int>(Strategy::GreedySgf))
    ->Arg(static_cast<int>(Strategy::OptSgf))
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
