#include "sgf/workbench.hpp"

#include "sgf/encoding.hpp"
#include "sgf/error.hpp"
#include "sgf/parser.hpp"
#include "sgf/templates.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace sgf {

namespace fs = std::filesystem;

void WorkloadSpec::check() const {
    if (!(selectivity >= 0 && selectivity <= 1))
        throw Error(ErrorCode::Config, "selectivity must lie in [0, 1]");
    if (value_width == 0)
        throw Error(ErrorCode::Config, "value_width must be positive");
}

SgfQuery workload_query(const WorkloadSpec& spec) {
    return parse_program(spec.query_text.empty() ? template_text(spec.template_id) : spec.query_text);
}

namespace {

std::string domain_value(char prefix, std::size_t n, std::size_t width) {
    std::string digits = std::to_string(n);
    std::string out(1, prefix);
    if (width > digits.size() + 1)
        out.append(width - digits.size() - 1, '0');
    return out + digits;
}

std::mt19937_64 relation_rng(std::uint64_t seed, const std::string& name) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stable_hash(name)), static_cast<std::uint32_t>(stable_hash(name) >> 32)};
    return std::mt19937_64(seq);
}

struct BaseRelation {
    std::size_t arity = 0;
    bool guard = false;
};

std::map<std::string, BaseRelation> base_relations(const SgfQuery& q) {
    std::set<std::string> produced;
    for (const auto& b : q.queries)
        produced.insert(b.output);
    std::map<std::string, BaseRelation> out;
    auto note = [&](const Atom& a, bool guard) {
        if (produced.count(a.relation))
            return;
        BaseRelation& r = out[a.relation];
        r.arity = a.arity();
        r.guard = r.guard || guard;
    };
    for (const auto& b : q.queries) {
        note(b.guard, true);
        if (b.condition)
            for (const auto& a : b.condition->atoms())
                note(a, false);
    }
    return out;
}

} // namespace

Database gen_data(const WorkloadSpec& spec) {
    spec.check();
    SgfQuery q = workload_query(spec);
    std::size_t domain = spec.guard_tuples;
    Database db;
    for (const auto& [name, info] : base_relations(q)) {
        std::mt19937_64 rng = relation_rng(spec.seed, name);
        std::vector<Tuple> rows;
        if (info.guard || info.arity > 1) {
            std::size_t n = info.guard ? spec.guard_tuples : spec.conditional_tuples;
            rows.assign(n, Tuple(info.arity));
            std::vector<std::size_t> perm(std::max(n, domain));
            for (std::size_t c = 0; c < info.arity; ++c) {
                std::iota(perm.begin(), perm.end(), 0);
                std::shuffle(perm.begin(), perm.end(), rng);
                for (std::size_t i = 0; i < n; ++i)
                    rows[i][c] = domain_value('k', perm[i], spec.value_width);
            }
        } else {
            std::size_t n = spec.conditional_tuples;
            auto matching = static_cast<std::size_t>(std::floor(spec.selectivity * static_cast<double>(n)));
            matching = std::min(matching, domain);
            std::vector<std::size_t> perm(domain);
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);
            for (std::size_t i = 0; i < matching; ++i)
                rows.push_back({domain_value('k', perm[i], spec.value_width)});
            for (std::size_t i = matching; i < n; ++i)
                rows.push_back({domain_value('n', i, spec.value_width)});
        }
        db.put(name, Relation(info.arity, std::move(rows)));
    }
    return db;
}

void write_database(const Database& db, const fs::path& dir, const std::vector<std::string>& names) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
    for (const auto& name : names.empty() ? db.names() : names) {
        const Relation& r = db.at(name);
        std::ofstream out(dir / (name + ".tsv"), std::ios::binary);
        if (!out)
            throw Error(ErrorCode::Io, "cannot write " + (dir / (name + ".tsv")).string());
        std::string line;
        for (const auto& t : r.tuples()) {
            line.clear();
            for (std::size_t i = 0; i < t.size(); ++i) {
                if (i)
                    line += '\t';
                line += t[i];
            }
            line += '\n';
            out << line;
        }
    }
}

LoadedDatabase load_database(const fs::path& dir, const SgfQuery* schema) {
    if (!fs::is_directory(dir))
        throw Error(ErrorCode::Io, dir.string() + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".tsv")
            files.push_back(entry.path());
    if (files.empty())
        throw Error(ErrorCode::EmptyDirectory, "no .tsv files in " + dir.string());
    std::sort(files.begin(), files.end());

    std::map<std::string, std::size_t> schema_arity;
    if (schema)
        for (const auto& [name, info] : base_relations(*schema))
            schema_arity[name] = info.arity;

    LoadedDatabase out;
    for (const auto& file : files) {
        std::string name = file.stem().string();
        std::ifstream in(file, std::ios::binary);
        if (!in)
            throw Error(ErrorCode::Io, "cannot read " + file.string());
        std::vector<Tuple> rows;
        std::size_t arity = 0;
        std::string line;
        for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            if (line.empty())
                continue;
            Tuple t;
            std::size_t start = 0;
            while (true) {
                std::size_t tab = line.find('\t', start);
                std::string_view raw(line.data() + start, (tab == std::string::npos ? line.size() : tab) - start);
                if (raw.find(kArityMark) != std::string_view::npos || raw.find(kValueSep) != std::string_view::npos)
                    throw Error(ErrorCode::InvalidValue, file.string() + ":" + std::to_string(lineno) +
                                                             ": value contains a reserved control character");
                t.push_back(canonical_datum(raw));
                if (tab == std::string::npos)
                    break;
                start = tab + 1;
            }
            if (rows.empty())
                arity = t.size();
            else if (t.size() != arity)
                throw Error(ErrorCode::RaggedRow, file.string() + ":" + std::to_string(lineno) + ": expected " +
                                                      std::to_string(arity) + " fields, found " +
                                                      std::to_string(t.size()));
            rows.push_back(std::move(t));
        }
        if (rows.empty()) {
            auto it = schema_arity.find(name);
            arity = it == schema_arity.end() ? 0 : it->second;
            out.warnings.push_back(name + ": empty file");
        }
        std::size_t read = rows.size();
        Relation rel(arity, std::move(rows));
        if (rel.size() < read) {
            out.duplicates[name] = read - rel.size();
            out.warnings.push_back(name + ": dropped " + std::to_string(read - rel.size()) + " duplicate rows");
        }
        out.db.put(name, std::move(rel));
    }
    return out;
}

namespace {

bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on")
        return true;
    if (v == "0" || v == "false" || v == "no" || v == "off")
        return false;
    throw Error(ErrorCode::Config, "invalid boolean '" + std::string(v) + "' for " + std::string(key));
}

std::uint64_t parse_uint(std::string_view key, std::string_view v) {
    std::uint64_t out = 0;
    auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || end != v.data() + v.size())
        throw Error(ErrorCode::Config, "invalid integer '" + std::string(v) + "' for " + std::string(key));
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

} // namespace

WorkbenchConfig parse_config(std::string_view text, WorkbenchConfig cfg) {
    std::size_t lineno = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw Error(ErrorCode::Config, "config line " + std::to_string(lineno) + ": expected key=value");
        std::string_view key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (set_constant(cfg.plan.cost, key, value))
            continue;
        if (key == "packing")
            cfg.plan.ops.packing = parse_bool(key, value);
        else if (key == "tuple_id")
            cfg.plan.ops.tuple_id = parse_bool(key, value);
        else if (key == "dynamic_replan")
            cfg.dynamic_replan = parse_bool(key, value);
        else if (key == "sample_rate") {
            auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), cfg.plan.sample.rate);
            if (ec != std::errc() || end != value.data() + value.size())
                throw Error(ErrorCode::Config, "invalid sample_rate '" + std::string(value) + "'");
        } else if (key == "seed")
            cfg.plan.sample.seed = parse_uint(key, value);
        else if (key == "threads")
            cfg.runtime.threads = std::max<std::uint64_t>(1, parse_uint(key, value));
        else if (key == "map_tasks")
            cfg.runtime.map_tasks = parse_uint(key, value);
        else if (key == "reducers")
            cfg.runtime.reducers = parse_uint(key, value);
        else
            throw Error(ErrorCode::Config, "config line " + std::to_string(lineno) + ": unknown key " +
                                               std::string(key));
    }
    cfg.plan.cost.check();
    if (!(cfg.plan.sample.rate > 0 && cfg.plan.sample.rate <= 1))
        throw Error(ErrorCode::Config, "sample_rate must lie in (0, 1]");
    cfg.runtime.cost = cfg.plan.cost;
    return cfg;
}

WorkbenchConfig load_config(const fs::path& path, WorkbenchConfig base) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Config, "cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

std::string checksum(const Database& db, const std::vector<std::string>& names) {
    std::string buf;
    for (const auto& name : names) {
        buf += name;
        buf += '\n';
        for (const auto& t : db.at(name).tuples()) {
            for (std::size_t i = 0; i < t.size(); ++i) {
                if (i)
                    buf += '\t';
                buf += t[i];
            }
            buf += '\n';
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(stable_hash(buf)));
    return hex;
}

Execution execute(const SgfQuery& q, const Database& db, Strategy strategy, const WorkbenchConfig& cfg) {
    PlanOptions opt = cfg.plan;
    opt.strategy = strategy;
    RuntimeConfig rt = cfg.runtime;
    rt.cost = cfg.plan.cost;

    Execution ex{db, {}, {}};
    std::vector<JobMetrics> jobs;
    std::size_t rounds_done = 0;
    SgfQuery remaining = q;
    while (!remaining.queries.empty()) {
        Plan plan = build_plan(remaining, ex.database, opt);
        bool partial = cfg.dynamic_replan && plan.stages.size() > 1;
        PlanDag dag;
        if (partial) {
            for (std::size_t j = 0; j < plan.dag.jobs.size(); ++j)
                if (plan.job_stage[j] == 0)
                    dag.jobs.push_back(plan.dag.jobs[j]);
        } else {
            dag = plan.dag;
        }
        PlanRun run = run_plan(ex.database, dag, rt);
        ex.database = std::move(run.database);
        std::string prefix = ex.plans.empty() ? "" : "P" + std::to_string(ex.plans.size() + 1) + ".";
        for (auto& m : run.metrics.jobs) {
            m.id = prefix + m.id;
            m.round += rounds_done;
            jobs.push_back(std::move(m));
        }
        rounds_done += run.metrics.rounds.size();

        SgfQuery next;
        if (partial) {
            std::set<std::size_t> done(plan.stages[0].nodes.begin(), plan.stages[0].nodes.end());
            for (std::size_t v = 0; v < remaining.size(); ++v)
                if (!done.count(v))
                    next.queries.push_back(remaining[v]);
        }
        ex.plans.push_back(std::move(plan));
        remaining = std::move(next);
    }
    ex.metrics = aggregate(std::move(jobs));
    return ex;
}

RunReport run_strategy(const SgfQuery& q, const Database& db, Strategy strategy, const WorkbenchConfig& cfg,
                       const SgfEvaluation& oracle, Database* result) {
    RunReport r;
    r.strategy = std::string(to_string(strategy));
    auto start = std::chrono::steady_clock::now();
    try {
        Execution ex = execute(q, db, strategy, cfg);
        r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        r.metrics = std::move(ex.metrics);
        for (const auto& j : r.metrics.jobs)
            r.estimated_cost += j.estimated_cost;
        std::vector<std::string> outputs;
        r.oracle_match = true;
        for (const auto& b : q.queries) {
            outputs.push_back(b.output);
            const Relation& got = ex.database.at(b.output);
            r.cardinalities[b.output] = got.size();
            if (!(got.tuples() == oracle.database.at(b.output).tuples()))
                r.oracle_match = false;
        }
        r.checksum = checksum(ex.database, outputs);
        r.ok = true;
        if (result)
            *result = std::move(ex.database);
    } catch (const Error& e) {
        r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        r.applicable = e.code() != ErrorCode::StrategyInapplicable;
        r.error = e.what();
    } catch (const std::exception& e) {
        r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        r.error = e.what();
    }
    return r;
}

std::vector<RunReport> compare(const SgfQuery& q, const Database& db, const std::vector<Strategy>& strategies,
                               const WorkbenchConfig& cfg) {
    require_valid(q);
    SgfEvaluation oracle = eval_sgf(db, q);
    std::vector<RunReport> rows;
    for (Strategy s : strategies)
        rows.push_back(run_strategy(q, db, s, cfg, oracle));
    return rows;
}

namespace {

const RunReport* baseline(const std::vector<RunReport>& rows) {
    for (const auto& r : rows)
        if (r.ok)
            return &r;
    return nullptr;
}

double ratio(double v, double base) { return base == 0 ? (v == 0 ? 1.0 : 0.0) : v / base; }

} // namespace

std::string format_table(const std::vector<RunReport>& rows) {
    const RunReport* base = baseline(rows);
    std::ostringstream os;
    char buf[512];
    std::snprintf(buf, sizeof buf, "%-11s %-6s %4s %6s %11s %11s %11s %13s %13s %7s %7s %7s %7s %9s\n", "strategy",
                  "oracle", "jobs", "rounds", "est_cost", "total_cost", "net_cost", "input_bytes", "shuffle_bytes",
                  "r_total", "r_net", "r_input", "r_shuf", "wall_ms");
    os << buf;
    for (const auto& r : rows) {
        if (!r.ok) {
            std::snprintf(buf, sizeof buf, "%-11s %s %s\n", r.strategy.c_str(), r.applicable ? "FAILED" : "n/a",
                          r.error.c_str());
            os << buf;
            continue;
        }
        const PlanMetrics& m = r.metrics;
        const PlanMetrics& b = base->metrics;
        std::snprintf(buf, sizeof buf, "%-11s %-6s %4zu %6zu %11.3f %11.3f %11.3f %13.0f %13.0f %7.3f %7.3f %7.3f %7.3f %9.1f\n",
                      r.strategy.c_str(), r.oracle_match ? "ok" : "MISS", m.jobs.size(), m.rounds.size(),
                      r.estimated_cost, m.total_cost, m.net_cost, m.input_bytes, m.shuffle_bytes,
                      ratio(m.total_cost, b.total_cost), ratio(m.net_cost, b.net_cost),
                      ratio(m.input_bytes, b.input_bytes), ratio(m.shuffle_bytes, b.shuffle_bytes), r.wall_ms);
        os << buf;
    }
    return os.str();
}

std::string to_json(const std::vector<RunReport>& rows) {
    using nlohmann::ordered_json;
    const RunReport* base = baseline(rows);
    ordered_json out = ordered_json::array();
    for (const auto& r : rows) {
        ordered_json j;
        j["strategy"] = r.strategy;
        j["ok"] = r.ok;
        if (!r.ok) {
            j["applicable"] = r.applicable;
            j["error"] = r.error;
            out.push_back(std::move(j));
            continue;
        }
        const PlanMetrics& m = r.metrics;
        const PlanMetrics& b = base->metrics;
        j["oracle_match"] = r.oracle_match;
        j["checksum"] = r.checksum;
        j["cardinalities"] = r.cardinalities;
        j["jobs"] = m.jobs.size();
        j["rounds"] = m.rounds.size();
        j["estimated_cost"] = r.estimated_cost;
        j["total_cost"] = m.total_cost;
        j["net_cost"] = m.net_cost;
        j["input_bytes"] = m.input_bytes;
        j["shuffle_bytes"] = m.shuffle_bytes;
        j["relative"] = {{"total_cost", ratio(m.total_cost, b.total_cost)},
                         {"net_cost", ratio(m.net_cost, b.net_cost)},
                         {"input_bytes", ratio(m.input_bytes, b.input_bytes)},
                         {"shuffle_bytes", ratio(m.shuffle_bytes, b.shuffle_bytes)}};
        j["wall_ms"] = r.wall_ms;
        j["metrics"] = ordered_json::parse(m.to_json());
        out.push_back(std::move(j));
    }
    return out.dump(2);
}

} // namespace sgf
