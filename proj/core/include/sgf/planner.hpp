#pragma once

#include "sgf/analysis.hpp"
#include "sgf/cost_model.hpp"
#include "sgf/database.hpp"
#include "sgf/operators.hpp"
#include "sgf/runtime.hpp"
#include "sgf/statistics.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sgf {

enum class Strategy { Seq, Par, Greedy, OneRound, SeqUnit, ParUnit, GreedySgf, OptBsgf, OptSgf };

std::string_view to_string(Strategy s);
/// Accepts the upper-case names printed by to_string. Throws Error(Config).
Strategy parse_strategy(std::string_view name);
std::vector<Strategy> all_strategies();

struct ExtractedBsgf {
    std::vector<SemiJoinEquation> equations;
    FormulaPtr phi;
};

/// One equation per distinct conditional atom, named "<Z>.x<k>". Equations
/// keep the guard's full variable tuple; the projection onto the output
/// variables happens when the formula is evaluated. Throws NoCondition.
ExtractedBsgf extract_semijoins(const BsgfQuery& q);

struct Extent {
    double bytes = 0;
    double records = 0;
};

/// Planning statistics of one semi-join equation.
struct EquationStats {
    std::string name;
    std::string guard;
    double guard_bytes = 0;
    Extent requests;
    std::string cond;
    double cond_bytes = 0;
    std::string assert_sig; // equations with equal signatures share asserts
    Extent asserts;
    double output_bytes = 0; // upper bound on the semi-join output
};

/// Planning statistics of one BSGF node.
struct NodeStats {
    std::vector<EquationStats> equations; // empty for a pure projection
    std::vector<std::string> relations;   // guard and conditional relation names
    std::string guard;
    double guard_bytes = 0;
    Extent guard_messages; // EVAL messages from the guard
    Extent x_messages;     // EVAL messages from one semi-join output
    double x_bytes = 0;    // size bound of one semi-join output
    double output_bytes = 0;
};

struct SgfStats {
    std::vector<NodeStats> nodes;
    DependencyGraph graph;
};

/// `db` extended with an upper bound for every Z_i it does not contain yet:
/// the projection of the conforming guard facts. Throws MissingStats.
Database bound_database(const Database& db, const SgfQuery& q);

SgfStats compute_stats(const SgfQuery& q, const Database& db, const OperatorConfig& ops, const SampleConfig& s);

/// Blocks of indices into an equation list, each sorted, ordered by first index.
using Partition = std::vector<std::vector<std::size_t>>;

/// Cost of one MSJ job over the given equations: per-input map parts with
/// shared reads and shared asserts, reduce over all messages.
double block_cost(const std::vector<EquationStats>& eqs, const std::vector<std::size_t>& block,
                  const CostConstants& c);
/// Sum of block costs, added in ascending order so equal partitions compare equal.
double partition_cost(const std::vector<EquationStats>& eqs, const Partition& p, const CostConstants& c);
double gain(const std::vector<EquationStats>& eqs, const std::vector<std::size_t>& a,
            const std::vector<std::size_t>& b, const CostConstants& c);

Partition singleton_partition(std::size_t n);
Partition greedy_bsgf(const std::vector<EquationStats>& eqs, const CostConstants& c);
/// Exhaustive over all set partitions; throws TooLarge above 12 equations.
Partition brute_force_bsgf(const std::vector<EquationStats>& eqs, const CostConstants& c);

/// Cost of the EVAL job (and projection jobs) for the given nodes.
double eval_stage_cost(const SgfStats& st, const std::vector<std::size_t>& nodes, const CostConstants& c);
/// EVAL cost plus the partition cost of a single BSGF program.
double bsgf_program_cost(const SgfStats& st, std::size_t node, const Partition& p, const CostConstants& c);

/// Ordered stages of BSGF indices.
using TopoSort = std::vector<std::vector<std::size_t>>;

bool is_valid_sort(const DependencyGraph& g, const TopoSort& s);
std::size_t overlap(const SgfStats& st, std::size_t node, const std::vector<std::size_t>& stage);
TopoSort greedy_sgf(const SgfStats& st);
/// Stage i holds the nodes whose longest path from a source has i edges.
TopoSort level_sort(const DependencyGraph& g);

/// Cost of a stage evaluated by a greedy partition of its pooled equations.
double stage_cost(const SgfStats& st, const std::vector<std::size_t>& stage, const CostConstants& c);
double sgf_plan_cost(const SgfStats& st, const TopoSort& sort, const CostConstants& c);

/// Distinct stage sets admitting a valid order, each in canonical order.
/// Plan cost does not depend on the order of stages, so these are the
/// candidates brute_force_sgf compares.
std::vector<TopoSort> candidate_sorts(const DependencyGraph& g);
/// Every valid ordered stage sequence.
std::vector<TopoSort> ordered_sorts(const DependencyGraph& g);
/// Throws TooLarge above 8 nodes.
TopoSort brute_force_sgf(const SgfStats& st, const CostConstants& c);

struct PlanOptions {
    Strategy strategy = Strategy::Greedy;
    OperatorConfig ops;
    CostConstants cost;
    SampleConfig sample;
};

struct StagePlan {
    std::vector<std::size_t> nodes;
    std::vector<std::vector<std::string>> blocks; // equation names per MSJ job
};

struct Plan {
    Strategy strategy = Strategy::Greedy;
    PlanDag dag;
    std::vector<StagePlan> stages;
    std::vector<std::size_t> job_stage; // stage index of every job
    std::vector<std::string> warnings;
    double estimated_cost = 0;
};

/// Compiles the query for one strategy and annotates estimated job costs.
/// Throws StrategyInapplicable with the reason when the strategy does not fit.
Plan build_plan(const SgfQuery& q, const Database& db, const PlanOptions& opt);

} // namespace sgf
