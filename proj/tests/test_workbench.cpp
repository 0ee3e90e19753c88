#include "sgf/error.hpp"
#include "sgf/parser.hpp"
#include "sgf/plan_export.hpp"
#include "sgf/templates.hpp"
#include "sgf/workbench.hpp"

#include "support.hpp"

#include "json.hpp"
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace sgf;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir() {
        static std::mt19937_64 rng(std::random_device{}());
        path_ = fs::temp_directory_path() / ("sgfq_test_" + std::to_string(rng()));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

    void write(const std::string& name, const std::string& content) const {
        std::ofstream(path_ / name, std::ios::binary) << content;
    }

private:
    fs::path path_;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::Validation;
}

WorkloadSpec small(const std::string& id, double selectivity = 0.5) {
    WorkloadSpec s;
    s.template_id = id;
    s.guard_tuples = s.conditional_tuples = 500;
    s.selectivity = selectivity;
    return s;
}

const RunReport& row(const std::vector<RunReport>& rows, const std::string& strategy) {
    for (const auto& r : rows)
        if (r.strategy == strategy)
            return r;
    throw std::runtime_error("no row " + strategy);
}

double round_input(const PlanMetrics& m, std::size_t round) {
    double sum = 0;
    for (const auto& j : m.jobs)
        if (j.round == round)
            sum += j.input_bytes;
    return sum;
}

} // namespace

TEST(LoadDatabase, SemiJoinExampleFacts) {
    TempDir d;
    d.write("R.tsv", "1\t2\n4\t5\n");
    d.write("S.tsv", "2\t3\n");
    LoadedDatabase l = load_database(d.path());
    EXPECT_EQ(l.db.at("R"), Relation(2, {{"1", "2"}, {"4", "5"}}));
    EXPECT_EQ(l.db.at("S"), Relation(2, {{"2", "3"}}));
    EXPECT_TRUE(l.warnings.empty());
    Relation z = eval_sgf(l.db, parse_program("Z := SELECT x FROM R(x,y) WHERE S(y,z);")).final_relation();
    EXPECT_EQ(z, Relation(1, {{"1"}}));
}

TEST(LoadDatabase, DuplicatesDroppedWithCount) {
    TempDir d;
    d.write("R.tsv", "1\t2\n1\t2\n3\t4\n1\t2\n");
    LoadedDatabase l = load_database(d.path());
    EXPECT_EQ(l.db.at("R").size(), 2u);
    EXPECT_EQ(l.duplicates.at("R"), 2u);
    ASSERT_EQ(l.warnings.size(), 1u);
    EXPECT_NE(l.warnings[0].find("2 duplicate"), std::string::npos);
}

TEST(LoadDatabase, RaggedRowNamesLine) {
    TempDir d;
    d.write("R.tsv", "1\t2\n3\t4\n5\n");
    try {
        load_database(d.path());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::RaggedRow);
        EXPECT_NE(std::string(e.what()).find("R.tsv:3"), std::string::npos) << e.what();
    }
}

TEST(LoadDatabase, EmptyDirectoryAndMissingDirectory) {
    TempDir d;
    d.write("notes.txt", "1\n");
    EXPECT_EQ(code_of([&] { load_database(d.path()); }), ErrorCode::EmptyDirectory);
    EXPECT_EQ(code_of([&] { load_database(d.path() / "nope"); }), ErrorCode::Io);
}

TEST(LoadDatabase, EmptyFileTakesArityFromSchema) {
    TempDir d;
    d.write("R.tsv", "1\t2\n");
    d.write("S.tsv", "");
    SgfQuery q = parse_program("Z := SELECT x FROM R(x,y) WHERE NOT S(y,x);");
    LoadedDatabase l = load_database(d.path(), &q);
    EXPECT_EQ(l.db.at("S").arity(), 2u);
    EXPECT_EQ(eval_sgf(l.db, q).final_relation(), Relation(1, {{"1"}}));
}

TEST(LoadDatabase, IntegerValuesCanonical) {
    TempDir d;
    d.write("R.tsv", "007\t-0\n7\t0\n");
    EXPECT_EQ(load_database(d.path()).db.at("R").size(), 1u);
}

TEST(LoadDatabase, WriteThenLoadRoundTrips) {
    TempDir d;
    Database db = gen_data(small("C2"));
    write_database(db, d.path());
    LoadedDatabase l = load_database(d.path());
    for (const auto& name : db.names())
        EXPECT_EQ(l.db.at(name), db.at(name)) << name;
}

TEST(GenData, ExactSelectivity) {
    for (double sel : {0.0, 0.1, 0.5, 0.9, 1.0}) {
        WorkloadSpec s;
        s.template_id = "A1";
        s.guard_tuples = s.conditional_tuples = 10000;
        s.selectivity = sel;
        s.seed = 7;
        Database db = gen_data(s);
        const Relation& r = db.at("R");
        EXPECT_EQ(r.size(), 10000u);
        for (std::size_t col = 0; col < 4; ++col) {
            std::set<std::string> keys;
            for (const auto& t : r.tuples())
                keys.insert(t[col]);
            const Relation& c = db.at(std::string(1, "STUV"[col]));
            EXPECT_EQ(c.size(), 10000u);
            std::size_t matches = 0;
            for (const auto& t : c.tuples())
                matches += keys.count(t[0]);
            EXPECT_EQ(matches, static_cast<std::size_t>(sel * 10000)) << sel;
        }
    }
}

TEST(GenData, SelectivityExtremes) {
    SgfQuery q = workload_query(small("A3"));
    Database none = gen_data(small("A3", 0.0));
    EXPECT_EQ(eval_sgf(none, q).final_relation().size(), 0u);
    Database all = gen_data(small("A3", 1.0));
    EXPECT_EQ(eval_sgf(all, q).final_relation(), all.at("R"));
}

TEST(GenData, ReproducibleFiles) {
    TempDir a, b;
    write_database(gen_data(small("C4")), a.path());
    write_database(gen_data(small("C4")), b.path());
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(a.path())) {
        EXPECT_EQ(slurp(e.path()), slurp(b.path() / e.path().filename())) << e.path();
        ++files;
    }
    EXPECT_GT(files, 0u);
    WorkloadSpec other = small("C4");
    other.seed = 2;
    EXPECT_FALSE(gen_data(other).at("R") == gen_data(small("C4")).at("R"));
}

TEST(GenData, RejectsBadSpec) {
    WorkloadSpec s = small("A1", 1.5);
    EXPECT_EQ(code_of([&] { gen_data(s); }), ErrorCode::Config);
}

TEST(Templates, AllParseAndValidate) {
    for (const auto& [id, text] : builtin_templates()) {
        SgfQuery q = parse_program(text);
        EXPECT_TRUE(validate(q).ok()) << id;
    }
    EXPECT_EQ(builtin_templates().size(), 11u);
    EXPECT_EQ(code_of([] { template_text("A9"); }), ErrorCode::UnknownTemplate);
}

TEST(Templates, Shapes) {
    auto a2 = parse_program(template_text("A2"))[0].conditional_atoms();
    ASSERT_EQ(a2.size(), 4u);
    for (const auto& a : a2)
        EXPECT_EQ(a.relation, "S");

    SgfQuery a4 = parse_program(template_text("A4"));
    ASSERT_EQ(a4.size(), 2u);
    std::set<std::string> c1, c2;
    for (const auto& a : a4[0].conditional_atoms())
        c1.insert(a.relation);
    for (const auto& a : a4[1].conditional_atoms())
        c2.insert(a.relation);
    EXPECT_EQ(a4[0].guard.relation, "R");
    EXPECT_EQ(a4[1].guard.relation, "G");
    for (const auto& r : c1)
        EXPECT_EQ(c2.count(r), 0u);

    BsgfQuery b1 = parse_program(template_text("B1"))[0];
    EXPECT_EQ(b1.conditional_atoms().size(), 16u);

    // B2 holds when exactly one of S, T, U, V contains x.
    BsgfQuery b2 = parse_program(template_text("B2"))[0];
    for (int mask = 0; mask < 16; ++mask) {
        std::map<std::string, std::vector<Tuple>> rel{{"R", {{"1", "2", "3", "4"}}}};
        for (int i = 0; i < 4; ++i)
            rel[std::string(1, "STUV"[i])] = (mask >> i & 1) ? std::vector<Tuple>{{"1"}} : std::vector<Tuple>{{"9"}};
        Database db = test::make_db(rel);
        EXPECT_EQ(eval_bsgf(db, b2).size(), __builtin_popcount(mask) == 1 ? 1u : 0u) << mask;
    }
}

TEST(Config, ParsesKeys) {
    WorkbenchConfig c = parse_config("# comment\n"
                                     "cost_h = 0\n"
                                     "h_r=2.5\n"
                                     "packing = false\n"
                                     "tuple_id = true\n"
                                     "sample_rate = 0.5\n"
                                     "threads = 3\n"
                                     "dynamic_replan = true\n");
    EXPECT_EQ(c.plan.cost.cost_h, 0);
    EXPECT_EQ(c.plan.cost.h_r, 2.5);
    EXPECT_FALSE(c.plan.ops.packing);
    EXPECT_TRUE(c.plan.ops.tuple_id);
    EXPECT_EQ(c.plan.sample.rate, 0.5);
    EXPECT_EQ(c.runtime.threads, 3u);
    EXPECT_TRUE(c.dynamic_replan);
}

TEST(Config, Errors) {
    for (const char* text : {"bogus = 1\n", "cost_h\n", "packing = maybe\n", "sample_rate = 0\n", "threads = x\n",
                             "h_r = -1\n"})
        EXPECT_EQ(code_of([&] { parse_config(text); }), ErrorCode::Config) << text;
    EXPECT_EQ(code_of([] { load_config("/nonexistent/sgfq.conf"); }), ErrorCode::Config);
}

TEST(Compare, SingleStrategyRow) {
    WorkloadSpec s = small("A1");
    SgfQuery q = workload_query(s);
    auto rows = compare(q, gen_data(s), {Strategy::Greedy}, WorkbenchConfig{});
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_TRUE(rows[0].ok);
    EXPECT_TRUE(rows[0].oracle_match);
    auto j = nlohmann::json::parse(to_json(rows));
    ASSERT_TRUE(j.is_array());
    EXPECT_DOUBLE_EQ(j[0]["relative"]["total_cost"].get<double>(), 1.0);
    EXPECT_NE(format_table(rows).find("GREEDY"), std::string::npos);
}

TEST(Compare, SameKeyQueryAllStrategiesMatch) {
    WorkloadSpec s;
    s.template_id = "A3";
    SgfQuery q = workload_query(s);
    Database db = gen_data(s);
    auto rows = compare(q, db, {Strategy::Seq, Strategy::Par, Strategy::Greedy, Strategy::OneRound}, WorkbenchConfig{});
    ASSERT_EQ(rows.size(), 4u);
    for (const auto& r : rows) {
        EXPECT_TRUE(r.ok) << r.strategy << ": " << r.error;
        EXPECT_TRUE(r.oracle_match) << r.strategy;
    }
    EXPECT_EQ(row(rows, "ONE_ROUND").metrics.rounds.size(), 1u);
    EXPECT_EQ(row(rows, "SEQ").checksum, row(rows, "ONE_ROUND").checksum);
}

TEST(Compare, RelativeColumnsAreRatios) {
    WorkloadSpec s = small("A5");
    auto rows = compare(workload_query(s), gen_data(s), {Strategy::Par, Strategy::Greedy, Strategy::GreedySgf},
                        WorkbenchConfig{});
    auto j = nlohmann::json::parse(to_json(rows));
    ASSERT_EQ(j.size(), 3u);
    double base = j[0]["metrics"]["total_cost"].get<double>();
    for (const auto& r : j)
        EXPECT_NEAR(r["relative"]["total_cost"].get<double>(), r["metrics"]["total_cost"].get<double>() / base, 1e-9);
}

TEST(Compare, InapplicableStrategyReportedNotThrown) {
    WorkloadSpec s = small("A1");
    auto rows = compare(workload_query(s), gen_data(s), {Strategy::OneRound, Strategy::Par}, WorkbenchConfig{});
    EXPECT_FALSE(rows[0].ok);
    EXPECT_FALSE(rows[0].applicable);
    EXPECT_TRUE(rows[1].ok);
}

TEST(Compare, GreedyReadsGuardOnce) {
    WorkloadSpec s;
    s.template_id = "A1";
    SgfQuery q = workload_query(s);
    Database db = gen_data(s);
    auto rows = compare(q, db, {Strategy::Par, Strategy::Greedy}, WorkbenchConfig{});
    const RunReport &par = row(rows, "PAR"), &greedy = row(rows, "GREEDY");
    EXPECT_LE(greedy.metrics.input_bytes, par.metrics.input_bytes);
    double guard = db.at("R").serialized_bytes();
    EXPECT_LE(round_input(greedy.metrics, 1), round_input(par.metrics, 1) - 3 * guard + 1e-6);
}

TEST(Execute, DynamicReplanKeepsOutputs) {
    for (const char* id : {"C2", "C3", "C4"}) {
        WorkloadSpec s = small(id);
        SgfQuery q = workload_query(s);
        Database db = gen_data(s);
        WorkbenchConfig cfg;
        Execution fixed = execute(q, db, Strategy::GreedySgf, cfg);
        cfg.dynamic_replan = true;
        Execution dynamic = execute(q, db, Strategy::GreedySgf, cfg);
        EXPECT_GT(dynamic.plans.size(), 1u) << id;
        for (const auto& b : q.queries)
            EXPECT_EQ(dynamic.database.at(b.output), fixed.database.at(b.output)) << id << " " << b.output;
        EXPECT_EQ(dynamic.metrics.rounds.size(), fixed.metrics.rounds.size()) << id;
    }
}

TEST(Checksum, OrderSensitiveOverNames) {
    Database db = test::make_db({{"A", {{"1"}}}, {"B", {{"2"}}}});
    EXPECT_EQ(checksum(db, {"A", "B"}), checksum(db, {"A", "B"}));
    EXPECT_NE(checksum(db, {"A", "B"}), checksum(db, {"B", "A"}));
    EXPECT_EQ(checksum(db, {"A"}).size(), 16u);
}

TEST(PlanExport, DotAndJson) {
    WorkloadSpec s = small("C1");
    SgfQuery q = workload_query(s);
    Database db = gen_data(s);
    Plan p = build_plan(q, db, PlanOptions{});
    std::string dot = to_dot(p, db);
    EXPECT_EQ(dot.rfind("digraph", 0), 0u);
    for (const auto& j : p.dag.jobs)
        EXPECT_NE(dot.find(j.id), std::string::npos) << j.id;
    EXPECT_NE(dot.find("->"), std::string::npos);

    auto j = nlohmann::json::parse(to_json(p, db));
    EXPECT_EQ(j["strategy"], "GREEDY");
    EXPECT_EQ(j["jobs"].size(), p.dag.jobs.size());
    EXPECT_EQ(j["stages"].size(), p.stages.size());
    double sum = 0;
    for (const auto& job : j["jobs"])
        sum += job["estimated_cost"].get<double>();
    EXPECT_NEAR(sum, p.estimated_cost, 1e-6 * std::max(1.0, p.estimated_cost));
}
