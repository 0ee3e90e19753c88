#include "sgf/planner.hpp"
#include "sgf/reference_eval.hpp"
#include "sgf/templates.hpp"
#include "sgf/workbench.hpp"

#include <benchmark/benchmark.h>

using namespace sgf;

// End-to-end plan + execute of every template and strategy at desk scale.
// Counters report the simulated costs next to the wall time.
static void BM_Template(benchmark::State& state, std::string id, Strategy strategy) {
    WorkloadSpec spec;
    spec.template_id = id;
    spec.guard_tuples = spec.conditional_tuples = static_cast<std::size_t>(state.range(0));
    SgfQuery q = workload_query(spec);
    Database db = gen_data(spec);
    PlanMetrics m;
    try {
        for (auto _ : state)
            m = execute(q, db, strategy, WorkbenchConfig{}).metrics;
    } catch (const std::exception& e) {
        state.SkipWithError(e.what());
        return;
    }
    state.counters["total_cost"] = m.total_cost;
    state.counters["net_cost"] = m.net_cost;
    state.counters["input_MB"] = m.input_bytes / 1048576.0;
    state.counters["shuffle_MB"] = m.shuffle_bytes / 1048576.0;
    state.counters["rounds"] = static_cast<double>(m.rounds.size());
}

static void BM_Reference(benchmark::State& state, std::string id) {
    WorkloadSpec spec;
    spec.template_id = id;
    spec.guard_tuples = spec.conditional_tuples = static_cast<std::size_t>(state.range(0));
    SgfQuery q = workload_query(spec);
    Database db = gen_data(spec);
    for (auto _ : state)
        benchmark::DoNotOptimize(eval_sgf(db, q));
}

int main(int argc, char** argv) {
    for (const auto& [id, text] : builtin_templates()) {
        benchmark::RegisterBenchmark(("Reference/" + id).c_str(), BM_Reference, id)
            ->Arg(10000)
            ->Unit(benchmark::kMillisecond);
        for (Strategy s : {Strategy::Seq, Strategy::Par, Strategy::Greedy, Strategy::OneRound, Strategy::GreedySgf}) {
            // Skip strategies the query shape does not admit.
            try {
                WorkloadSpec spec;
                spec.template_id = id;
                spec.guard_tuples = spec.conditional_tuples = 10;
                PlanOptions opt;
                opt.strategy = s;
                build_plan(workload_query(spec), gen_data(spec), opt);
            } catch (const std::exception&) {
                continue;
            }
            benchmark::RegisterBenchmark((id + "/" + std::string(to_string(s))).c_str(), BM_Template, id, s)
                ->Arg(10000)
                ->Unit(benchmark::kMillisecond);
        }
    }
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv))
        return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
