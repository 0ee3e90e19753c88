#pragma once

#include "sgf/cost_model.hpp"
#include "sgf/database.hpp"
#include "sgf/job.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace sgf {

struct RuntimeConfig {
    CostConstants cost;
    std::size_t threads = 1;
    std::size_t map_tasks = 0; // per input; 0 derives the count from split_size
    std::size_t reducers = 0;  // 0 derives the count from reducer_chunk
};

/// Number of map tasks for an input of `bytes` (at least one).
std::size_t split_count(double mb, double split_size_mb);
/// Contiguous [begin, end) ranges covering `records` in `splits` pieces.
std::vector<std::pair<std::size_t, std::size_t>> split_ranges(std::size_t records, std::size_t splits);

std::uint64_t stable_hash(std::string_view bytes);

/// Runs fn(0..n-1) on up to `threads` workers; rethrows the first failure.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

struct InputMetrics {
    std::string relation;
    double bytes = 0;   // N
    double records = 0;
    double map_output_bytes = 0; // M
    double map_output_records = 0;
    std::size_t mappers = 1;
};

struct JobMetrics {
    std::string id;
    std::string label;
    std::size_t round = 0;
    std::vector<InputMetrics> inputs;
    double input_bytes = 0;
    double map_output_bytes = 0;
    double map_output_records = 0;
    double shuffle_bytes = 0;
    double reduce_output_bytes = 0;
    double reduce_output_records = 0;
    std::size_t reducers = 0;
    std::size_t groups = 0;
    double estimated_cost = 0;
    double measured_cost = 0;
    JobCostEstimate measured;

    bool operator==(const JobMetrics& o) const;
};

using RelationResolver = std::function<const Relation*(std::string_view)>;

struct JobResult {
    std::vector<Relation> outputs;
    JobMetrics metrics;
};

/// Throws UnknownRelation for an unresolvable input and ReduceError, with
/// the failing key, when the reduce function throws.
JobResult run_job(const RelationResolver& resolve, const JobSpec& job, const RuntimeConfig& cfg);
JobResult run_job(const Database& db, const JobSpec& job, const RuntimeConfig& cfg);

struct PlanDag {
    std::vector<JobSpec> jobs;
};

struct DagShape {
    std::vector<std::pair<std::size_t, std::size_t>> edges; // (producer, consumer)
    std::vector<std::size_t> round;                         // 1-based per job
    std::size_t rounds = 0;
};

/// Edges come from relation names: a job consuming another's output depends
/// on it. Inputs neither produced in the plan nor present in `base` raise
/// MissingUpstreamOutput; cycles raise InvalidPlan.
DagShape analyze(const PlanDag& plan, const std::function<bool(std::string_view)>& is_base);
DagShape analyze(const PlanDag& plan, const Database& db);

struct RoundMetrics {
    double input_bytes = 0;
    double shuffle_bytes = 0;
    double total_cost = 0;
    double max_cost = 0;
};

struct PlanMetrics {
    std::vector<JobMetrics> jobs;
    std::vector<RoundMetrics> rounds;
    double total_cost = 0;
    double net_cost = 0;
    double input_bytes = 0;
    double shuffle_bytes = 0;
    double map_output_records = 0;

    bool operator==(const PlanMetrics& o) const;
    std::string to_json() const;
};

/// Aggregates per-job metrics (rounds already assigned) into plan totals.
PlanMetrics aggregate(std::vector<JobMetrics> jobs);

struct PlanRun {
    Database database; // base relations plus every job output
    PlanMetrics metrics;
};

PlanRun run_plan(const Database& db, const PlanDag& plan, const RuntimeConfig& cfg);

} // namespace sgf
