#include "sgf/analysis.hpp"
#include "sgf/error.hpp"
#include "sgf/parser.hpp"
#include "sgf/plan_export.hpp"
#include "sgf/planner.hpp"
#include "sgf/templates.hpp"
#include "sgf/workbench.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace {

enum Exit { kOk = 0, kOther = 1, kValidation = 2, kOracleMismatch = 3, kConfig = 4 };

struct QuerySource {
    std::string file;
    std::string template_id;

    std::string text() const {
        if (!template_id.empty())
            return sgf::template_text(template_id);
        if (file.empty())
            throw sgf::Error(sgf::ErrorCode::Config, "give a query file or --template");
        std::ifstream in(file, std::ios::binary);
        if (!in)
            throw sgf::Error(sgf::ErrorCode::Io, "cannot read " + file);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }
};

struct Common {
    std::string config;
    std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
    std::string data;

    sgf::WorkbenchConfig load() const {
        sgf::WorkbenchConfig cfg;
        cfg.runtime.threads = threads;
        if (!config.empty())
            cfg = sgf::load_config(config, cfg);
        cfg.runtime.cost = cfg.plan.cost;
        return cfg;
    }
};

std::vector<sgf::Strategy> parse_strategies(const std::vector<std::string>& names) {
    std::vector<sgf::Strategy> out;
    for (const auto& n : names)
        out.push_back(sgf::parse_strategy(n));
    return out;
}

sgf::SgfQuery parse_valid(const QuerySource& src) {
    sgf::SgfQuery q = sgf::parse_program(src.text());
    sgf::require_valid(q);
    return q;
}

sgf::Database load_data(const std::string& dir, const sgf::SgfQuery& q) {
    sgf::LoadedDatabase loaded = sgf::load_database(dir, &q);
    for (const auto& w : loaded.warnings)
        std::cerr << "warning: " << w << "\n";
    return std::move(loaded.db);
}

int report_rows(const std::vector<sgf::RunReport>& rows, bool json) {
    std::cout << (json ? sgf::to_json(rows) + "\n" : sgf::format_table(rows));
    int code = kOk;
    for (const auto& r : rows) {
        if (!r.ok && r.applicable && code == kOk)
            code = kOther;
        if (r.ok && !r.oracle_match)
            code = kOracleMismatch;
    }
    return code;
}

int exit_code(const sgf::Error& e) {
    switch (e.code()) {
    case sgf::ErrorCode::Syntax:
    case sgf::ErrorCode::ArityMismatch:
    case sgf::ErrorCode::DuplicateOutputName:
    case sgf::ErrorCode::Validation:
        return kValidation;
    case sgf::ErrorCode::Config:
    case sgf::ErrorCode::UnknownTemplate:
    case sgf::ErrorCode::StrategyInapplicable:
        return kConfig;
    default:
        return kOther;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sgfq: plan and run guarded semi-join queries on a simulated MapReduce engine"};
    app.require_subcommand(1);

    QuerySource src;
    Common common;
    std::string strategy = "GREEDY";
    std::vector<std::string> strategies;
    bool dot = false, json = false;
    std::string out_dir;

    auto add_query = [&](CLI::App* cmd) {
        cmd->add_option("query", src.file, "Query file");
        cmd->add_option("--template", src.template_id, "Built-in template id (A1-A5, B1, B2, C1-C4)");
    };
    auto add_common = [&](CLI::App* cmd, bool data) {
        cmd->add_option("--config", common.config, "key=value config file");
        cmd->add_option("--threads", common.threads, "Worker threads")->check(CLI::PositiveNumber);
        if (data)
            cmd->add_option("--data", common.data, "Directory of <relation>.tsv files")->required();
    };

    auto* validate = app.add_subcommand("validate", "Parse and check a query");
    add_query(validate);

    auto* plan = app.add_subcommand("plan", "Show the plan a strategy builds");
    add_query(plan);
    add_common(plan, true);
    plan->add_option("--strategy", strategy, "Strategy name");
    plan->add_flag("--dot", dot, "Graphviz output");
    plan->add_flag("--json", json, "JSON output");

    auto* run = app.add_subcommand("run", "Execute one strategy and check it against the reference evaluator");
    add_query(run);
    add_common(run, true);
    run->add_option("--strategy", strategy, "Strategy name");
    run->add_flag("--json", json, "JSON report");
    run->add_option("--out", out_dir, "Write the output relations here");

    auto* cmp = app.add_subcommand("compare", "Execute several strategies side by side");
    add_query(cmp);
    add_common(cmp, true);
    cmp->add_option("--strategies", strategies, "Strategies (default: all applicable)")->delimiter(',');
    cmp->add_flag("--json", json, "JSON report");

    sgf::WorkloadSpec spec;
    std::vector<std::size_t> scales{1000, 10000};
    auto* bench = app.add_subcommand("bench", "Generate data for a template at several scales and compare strategies");
    bench->add_option("--template", spec.template_id, "Template id")->required();
    add_common(bench, false);
    bench->add_option("--scales", scales, "Guard/conditional tuple counts")->delimiter(',');
    bench->add_option("--selectivity", spec.selectivity, "Fraction of matching conditional tuples")
        ->check(CLI::Range(0.0, 1.0));
    bench->add_option("--seed", spec.seed, "Generator seed");
    bench->add_option("--strategies", strategies, "Strategies")->delimiter(',');
    bench->add_flag("--json", json, "JSON report");

    std::string query_file;
    auto* gen = app.add_subcommand("gen-data", "Write a synthetic database for a template or query");
    gen->add_option("--template", spec.template_id, "Template id");
    gen->add_option("--query", query_file, "Custom query file");
    gen->add_option("--out", out_dir, "Output directory")->required();
    gen->add_option("--guard", spec.guard_tuples, "Guard tuples");
    gen->add_option("--cond", spec.conditional_tuples, "Conditional tuples");
    gen->add_option("--selectivity", spec.selectivity, "Fraction of matching conditional tuples")
        ->check(CLI::Range(0.0, 1.0));
    gen->add_option("--value-width", spec.value_width, "Bytes per value")->check(CLI::PositiveNumber);
    gen->add_option("--seed", spec.seed, "Generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (validate->parsed()) {
            sgf::SgfQuery q = sgf::parse_program(src.text());
            sgf::ValidationReport rep = sgf::validate(q);
            for (const auto& w : rep.warnings)
                std::cout << "warning: " << w << "\n";
            for (const auto& v : rep.violations)
                std::cout << sgf::to_string(v.kind) << ": " << v.message << "\n";
            if (!rep.ok())
                return kValidation;
            std::cout << "ok: " << q.size() << " queries\n";
            return kOk;
        }
        if (plan->parsed()) {
            sgf::SgfQuery q = parse_valid(src);
            sgf::WorkbenchConfig cfg = common.load();
            sgf::Database db = load_data(common.data, q);
            cfg.plan.strategy = sgf::parse_strategy(strategy);
            sgf::Plan p = sgf::build_plan(q, db, cfg.plan);
            for (const auto& w : p.warnings)
                std::cerr << "warning: " << w << "\n";
            if (dot)
                std::cout << sgf::to_dot(p, db);
            else if (json)
                std::cout << sgf::to_json(p, db) << "\n";
            else {
                sgf::DagShape shape = sgf::analyze(p.dag, db);
                std::cout << sgf::to_string(p.strategy) << ": " << p.dag.jobs.size() << " jobs, " << shape.rounds
                          << " rounds, estimated cost " << p.estimated_cost << "\n";
                for (std::size_t j = 0; j < p.dag.jobs.size(); ++j) {
                    const auto& job = p.dag.jobs[j];
                    std::cout << "  " << job.id << " round " << shape.round[j] << " " << job.label;
                    for (const auto& e : job.equations)
                        std::cout << " " << e;
                    std::cout << "  (est. " << job.estimated_cost << ")\n";
                }
            }
            return kOk;
        }
        if (run->parsed()) {
            sgf::SgfQuery q = parse_valid(src);
            sgf::WorkbenchConfig cfg = common.load();
            sgf::Database db = load_data(common.data, q);
            sgf::Strategy s = sgf::parse_strategy(strategy);
            sgf::SgfEvaluation oracle = sgf::eval_sgf(db, q);
            sgf::Database result;
            sgf::RunReport r = sgf::run_strategy(q, db, s, cfg, oracle, &result);
            if (!r.ok)
                throw sgf::Error(sgf::ErrorCode::StrategyInapplicable, r.error);
            if (!out_dir.empty()) {
                std::vector<std::string> names;
                for (const auto& b : q.queries)
                    names.push_back(b.output);
                sgf::write_database(result, out_dir, names);
            }
            return report_rows({r}, json);
        }
        if (cmp->parsed()) {
            sgf::SgfQuery q = parse_valid(src);
            sgf::WorkbenchConfig cfg = common.load();
            sgf::Database db = load_data(common.data, q);
            auto list = strategies.empty() ? sgf::all_strategies() : parse_strategies(strategies);
            return report_rows(sgf::compare(q, db, list, cfg), json);
        }
        if (bench->parsed()) {
            sgf::WorkbenchConfig cfg = common.load();
            sgf::SgfQuery q = sgf::workload_query(spec);
            auto list = strategies.empty() ? sgf::all_strategies() : parse_strategies(strategies);
            int code = kOk;
            for (std::size_t n : scales) {
                spec.guard_tuples = spec.conditional_tuples = n;
                sgf::Database db = sgf::gen_data(spec);
                if (!json)
                    std::cout << "# " << spec.template_id << " scale " << n << " selectivity " << spec.selectivity
                              << "\n";
                code = std::max(code, report_rows(sgf::compare(q, db, list, cfg), json));
            }
            return code;
        }
        if (gen->parsed()) {
            if (!query_file.empty()) {
                src.file = query_file;
                spec.query_text = src.text();
            }
            sgf::Database db = sgf::gen_data(spec);
            sgf::write_database(db, out_dir);
            for (const auto& name : db.names())
                std::cout << name << ".tsv " << db.at(name).size() << " rows\n";
            return kOk;
        }
    } catch (const sgf::ParseError& e) {
        std::cerr << "error: line " << e.line() << ", column " << e.column() << ": " << e.message() << "\n";
        return kValidation;
    } catch (const sgf::Error& e) {
        std::cerr << "error [" << sgf::to_string(e.code()) << "]: " << e.what() << "\n";
        return exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kOther;
    }
    return kOther;
}
