#pragma once

#include "sgf/database.hpp"
#include "sgf/planner.hpp"
#include "sgf/query.hpp"
#include "sgf/reference_eval.hpp"
#include "sgf/runtime.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace sgf {

struct WorkloadSpec {
    std::string template_id = "A1"; // ignored when query_text is set
    std::string query_text;
    std::size_t guard_tuples = 10000;
    std::size_t conditional_tuples = 10000;
    double selectivity = 0.5;
    std::size_t value_width = 8;
    std::uint64_t seed = 1;

    /// Throws Error(Config).
    void check() const;
};

/// Parses the spec's template (or custom text). Throws UnknownTemplate.
SgfQuery workload_query(const WorkloadSpec& spec);

/// Base relations of the spec's query. Guard relations (and any base
/// relation of arity > 1) draw every column from an independent shuffle of
/// the key domain, so every guard key occurs in every column. Unary
/// conditional relations hold exactly floor(selectivity * conditional_tuples)
/// guard keys, capped at the domain size, padded with keys outside the domain.
Database gen_data(const WorkloadSpec& spec);

/// One `<name>.tsv` per relation, tuples in sorted order.
void write_database(const Database& db, const std::filesystem::path& dir,
                    const std::vector<std::string>& names = {});

struct LoadedDatabase {
    Database db;
    std::map<std::string, std::size_t> duplicates; // relation -> dropped rows
    std::vector<std::string> warnings;
};

/// Reads every `*.tsv` in `dir`. Arity comes from the first row, or from
/// `schema` for an empty file. Throws RaggedRow, EmptyDirectory, InvalidValue, Io.
LoadedDatabase load_database(const std::filesystem::path& dir, const SgfQuery* schema = nullptr);

struct WorkbenchConfig {
    PlanOptions plan;
    RuntimeConfig runtime;
    bool dynamic_replan = false;
};

/// Flat `key = value` lines. Keys: the cost constants, packing, tuple_id,
/// sample_rate, seed, dynamic_replan, threads, map_tasks, reducers.
/// Throws Error(Config).
WorkbenchConfig parse_config(std::string_view text, WorkbenchConfig base = {});
WorkbenchConfig load_config(const std::filesystem::path& path, WorkbenchConfig base = {});

/// Hex FNV-1a digest over the named relations in order.
std::string checksum(const Database& db, const std::vector<std::string>& names);

struct Execution {
    Database database;
    PlanMetrics metrics;
    std::vector<Plan> plans; // one per planning pass
};

/// Plans and runs the query. With dynamic_replan, only the first stage of
/// each plan runs before the remaining queries are planned again against
/// the materialized outputs.
Execution execute(const SgfQuery& q, const Database& db, Strategy strategy, const WorkbenchConfig& cfg);

struct RunReport {
    std::string strategy;
    bool ok = false;
    bool applicable = true; // false when the strategy does not fit the query
    std::string error;
    std::string checksum;
    std::map<std::string, std::size_t> cardinalities;
    PlanMetrics metrics;
    double estimated_cost = 0;
    bool oracle_match = false;
    double wall_ms = 0;
};

/// Runs one strategy and compares every output relation with `oracle`.
/// Failures are reported in the result, not thrown. The final database is
/// copied to `result` when given.
RunReport run_strategy(const SgfQuery& q, const Database& db, Strategy strategy, const WorkbenchConfig& cfg,
                       const SgfEvaluation& oracle, Database* result = nullptr);

std::vector<RunReport> compare(const SgfQuery& q, const Database& db, const std::vector<Strategy>& strategies,
                               const WorkbenchConfig& cfg);

/// Absolute columns and their ratios to the first successful row.
std::string format_table(const std::vector<RunReport>& rows);
std::string to_json(const std::vector<RunReport>& rows);

} // namespace sgf
