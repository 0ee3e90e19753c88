#include "sgf/encoding.hpp"
#include "sgf/operators.hpp"
#include "sgf/parser.hpp"
#include "sgf/planner.hpp"
#include "sgf/runtime.hpp"
#include "sgf/workbench.hpp"

#include <benchmark/benchmark.h>

using namespace sgf;

namespace {

struct Fixture {
    SgfQuery query;
    Database db;
};

Fixture make(const std::string& id, std::size_t tuples) {
    WorkloadSpec spec;
    spec.template_id = id;
    spec.guard_tuples = spec.conditional_tuples = tuples;
    return {workload_query(spec), gen_data(spec)};
}

} // namespace

static void BM_EncodeKey(benchmark::State& state) {
    Tuple t{"k0000123", "k0004567", "k0000089", "k0009999"};
    for (auto _ : state)
        benchmark::DoNotOptimize(encode_key(t));
}
BENCHMARK(BM_EncodeKey);

static void BM_MsjJob(benchmark::State& state) {
    Fixture f = make("A1", static_cast<std::size_t>(state.range(0)));
    ExtractedBsgf ex = extract_semijoins(f.query[0]);
    OperatorConfig ops;
    ops.packing = state.range(1);
    JobSpec job = build_msj_job("J", ex.equations, ops);
    RuntimeConfig cfg;
    for (auto _ : state)
        benchmark::DoNotOptimize(run_job(f.db, job, cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0) * 5);
}
BENCHMARK(BM_MsjJob)->ArgsProduct({{1000, 10000}, {0, 1}})->Unit(benchmark::kMillisecond);

static void BM_OneRoundJob(benchmark::State& state) {
    Fixture f = make("A3", static_cast<std::size_t>(state.range(0)));
    JobSpec job = build_one_round_job("J", f.query[0], OperatorConfig{});
    RuntimeConfig cfg;
    for (auto _ : state)
        benchmark::DoNotOptimize(run_job(f.db, job, cfg));
}
BENCHMARK(BM_OneRoundJob)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_RunPlanThreads(benchmark::State& state) {
    Fixture f = make("B1", 5000);
    Plan p = build_plan(f.query, f.db, PlanOptions{});
    RuntimeConfig cfg;
    cfg.threads = static_cast<std::size_t>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(run_plan(f.db, p.dag, cfg));
}
BENCHMARK(BM_RunPlanThreads)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
