#pragma once

#include "sgf/cost_model.hpp"
#include "sgf/database.hpp"
#include "sgf/job.hpp"
#include "sgf/runtime.hpp"

#include <cstdint>

namespace sgf {

struct SampleConfig {
    double rate = 1.0; // fraction of each input fed to the simulated mappers
    std::uint64_t seed = 0;
};

/// Deterministic Bernoulli(rate) choice for one record.
bool sampled(const SampleConfig& s, std::uint32_t file_id, std::uint64_t ordinal);

struct JobStats {
    std::vector<InputMetrics> inputs; // scaled to the full input
    double output_bound_bytes = 0;    // K upper bound
    JobCostEstimate cost;
};

/// Runs the job's map function over a sample of every input and scales the
/// message volume by 1/rate; N is exact. Throws MissingStats when an input
/// cannot be resolved and Error(Config) for a rate outside (0, 1].
JobStats estimate_job(const RelationResolver& resolve, const JobSpec& job, const CostConstants& c,
                      const SampleConfig& s);

/// The superset of an output described by `bound`.
Relation materialize_bound(const Relation& source, const OutputBound& bound, std::size_t arity);

/// Fills JobSpec::estimated_cost for every job, standing in upper-bound
/// relations for outputs not yet computed. Returns the summed estimate.
double annotate_estimates(PlanDag& plan, const Database& db, const CostConstants& c, const SampleConfig& s);

} // namespace sgf
