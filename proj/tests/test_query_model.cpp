#include "sgf/analysis.hpp"
#include "sgf/error.hpp"
#include "sgf/parser.hpp"
#include "sgf/query.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace sgf;

namespace {

Atom parse_atom(const std::string& text) {
    // Output variable need not occur in the guard: parsing does not validate.
    return parse_program("Tmp := SELECT v FROM " + text + ";")[0].guard;
}

SgfQuery branched_chain() {
    return parse_program(R"(
        Z1 := SELECT x, y FROM R1(x,y) WHERE S(x);
        Z2 := SELECT x, y FROM Z1(x,y) WHERE T(x);
        Z3 := SELECT x, y FROM Z2(x,y) WHERE U(x);
        Z4 := SELECT x, y FROM R2(x,y) WHERE T(x);
        Z5 := SELECT x, y FROM Z3(x,y) WHERE Z4(x,x);
    )");
}

// The five queries use R and S at different arities, so each is its own program.
const std::vector<std::string> kSamplePrograms{
    "Z1 := SELECT x FROM R(x) WHERE S(x);",
    "Z2 := SELECT x FROM R(x) WHERE NOT S(x);",
    "Z3 := SELECT x, y FROM R(x,y) WHERE S(y,z);",
    "Z4 := SELECT x, y FROM R(x,y) WHERE NOT S(y,z);",
    "Z5 := SELECT (x,y) FROM R(x,y,4) WHERE (S(1,x) AND NOT S(y,10)) OR (NOT S(1,x) AND S(y,10));",
};

} // namespace

TEST(Parser, SingleQuery) {
    SgfQuery q = parse_program("Z := SELECT x FROM R(x,y) WHERE S(x);");
    ASSERT_EQ(q.size(), 1u);
    EXPECT_EQ(q[0].output, "Z");
    EXPECT_EQ(q[0].out_vars, std::vector<std::string>{"x"});
    EXPECT_EQ(q[0].guard.relation, "R");
    ASSERT_EQ(q[0].guard.arity(), 2u);
    EXPECT_TRUE(q[0].guard.terms[1].is_variable());
    ASSERT_TRUE(q[0].condition);
    EXPECT_EQ(q[0].condition->kind(), Condition::Kind::Leaf);
    EXPECT_EQ(q[0].condition->atom().relation, "S");
}

TEST(Parser, MissingWhereMeansNoCondition) {
    SgfQuery q = parse_program("Z := SELECT x FROM R(x);");
    EXPECT_FALSE(q[0].has_condition());
}

TEST(Parser, EmptySelectListIsSyntaxError) {
    try {
        parse_program("Z := SELECT FROM R(x);");
        FAIL() << "expected a syntax error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.code(), ErrorCode::Syntax);
        EXPECT_EQ(e.line(), 1u);
        EXPECT_EQ(e.column(), 13u);
    }
}

TEST(Parser, ErrorPositionOnLaterLine) {
    try {
        parse_program("Z := SELECT x FROM R(x);\n-- comment\nY := SELECT x FROM R(x) WHERE S(x) AND;");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.code(), ErrorCode::Syntax);
        EXPECT_EQ(e.line(), 3u);
        EXPECT_EQ(e.column(), 39u);
    }
}

TEST(Parser, ArityMismatchAcrossQueries) {
    try {
        parse_program("Z := SELECT x FROM R(x,y) WHERE S(x); Y := SELECT x FROM R(x);");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.code(), ErrorCode::ArityMismatch);
    }
}

TEST(Parser, DuplicateOutputName) {
    EXPECT_THROW(
        {
            try {
                parse_program("Z := SELECT x FROM R(x); Z := SELECT x FROM S(x);");
            } catch (const ParseError& e) {
                EXPECT_EQ(e.code(), ErrorCode::DuplicateOutputName);
                throw;
            }
        },
        ParseError);
}

TEST(Parser, PrecedenceAndKeywordsCaseInsensitive) {
    SgfQuery q = parse_program("Z := select x from R(x) where not S(x) and T(x) or U(x);");
    const auto& c = q[0].condition;
    ASSERT_EQ(c->kind(), Condition::Kind::Or);
    ASSERT_EQ(c->lhs()->kind(), Condition::Kind::And);
    EXPECT_EQ(c->lhs()->lhs()->kind(), Condition::Kind::Not);
    EXPECT_EQ(c->rhs()->atom().relation, "U");
}

TEST(Parser, ConstantsAreCanonical) {
    SgfQuery q = parse_program(R"(Z := SELECT x FROM R(x, 007, "7", "bad", -0) WHERE S("a\"b");)");
    const auto& t = q[0].guard.terms;
    EXPECT_EQ(t[1].text(), "7");
    EXPECT_EQ(t[2].text(), "7");
    EXPECT_EQ(t[3].text(), "bad");
    EXPECT_EQ(t[4].text(), "0");
    EXPECT_EQ(q[0].condition->atom().terms[0].text(), "a\"b");
}

TEST(Validate, NegatedOutputReferenceIsValid) {
    SgfQuery q = parse_program(R"(
        Z1 := SELECT aut FROM Amaz(ttl, aut, "bad") WHERE BN(ttl, aut, "bad") AND BD(ttl, aut, "bad");
        Z2 := SELECT (new, aut) FROM Upcoming(new, aut) WHERE NOT Z1(aut);
    )");
    EXPECT_TRUE(validate(q).ok());
}

TEST(Validate, GuardednessViolation) {
    SgfQuery q = parse_program("Z := SELECT x FROM R(x) WHERE S(y,z) AND T(z);");
    ValidationReport r = validate(q);
    ASSERT_TRUE(r.has(ViolationKind::GuardednessViolation));
    const Violation& v = r.violations.front();
    ASSERT_EQ(v.atoms.size(), 2u);
    EXPECT_EQ(v.atoms[0].relation, "S");
    EXPECT_EQ(v.atoms[1].relation, "T");
    EXPECT_THROW(require_valid(q), Error);
}

TEST(Validate, OutputVarNotInGuard) {
    EXPECT_TRUE(validate(parse_program("Z := SELECT w FROM R(x,y);")).has(ViolationKind::OutputVarNotInGuard));
}

TEST(Validate, ForwardAndSelfReference) {
    EXPECT_TRUE(validate(parse_program("Z1 := SELECT x FROM R(x) WHERE Z2(x); Z2 := SELECT x FROM R(x);"))
                    .has(ViolationKind::ForwardReference));
    EXPECT_TRUE(validate(parse_program("Z1 := SELECT x FROM R(x) WHERE Z1(x);")).has(ViolationKind::ForwardReference));
}

TEST(Validate, ReportsEveryViolation) {
    ValidationReport r = validate(parse_program("Z := SELECT w FROM R(x) WHERE S(y,z) AND T(z);"));
    EXPECT_TRUE(r.has(ViolationKind::GuardednessViolation));
    EXPECT_TRUE(r.has(ViolationKind::OutputVarNotInGuard));
}

TEST(Validate, DuplicateConditionalAtomWarns) {
    ValidationReport r = validate(parse_program("Z := SELECT x FROM R(x) WHERE S(x) AND S(x);"));
    EXPECT_TRUE(r.ok());
    EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(Conforms, RepeatedVariableAndConstant) {
    Atom a = parse_atom("R(x,2,x,y)");
    EXPECT_TRUE(conforms(Fact{"R", {"1", "2", "1", "3"}}, a));
    EXPECT_FALSE(conforms(Fact{"R", {"1", "2", "4", "3"}}, a));
    EXPECT_FALSE(conforms(Fact{"R", {"1", "5", "1", "3"}}, a));
}

TEST(Conforms, RelationAndRepeatedVariable) {
    EXPECT_FALSE(conforms(Fact{"R", {"1", "2"}}, parse_atom("S(x,y)")));
    EXPECT_FALSE(conforms(Fact{"R", {"1", "2"}}, parse_atom("R(x,x)")));
    EXPECT_FALSE(conforms(Fact{"R", {"1"}}, parse_atom("R(x,y)")));
}

TEST(Conforms, ReflexiveOnGroundAtoms) {
    std::mt19937 rng(11);
    for (int i = 0; i < 200; ++i) {
        Tuple t;
        std::string text = "R(";
        for (int k = 0, n = 1 + static_cast<int>(rng() % 4); k < n; ++k) {
            t.push_back(std::to_string(rng() % 5));
            text += (k ? "," : "") + t.back();
        }
        Atom ground = parse_atom(text + ")");
        EXPECT_TRUE(conforms(Fact{"R", t}, ground));
    }
}

TEST(Project, RepeatedVariableAndConstant) {
    Atom a = parse_atom("R(x,y,x,z)");
    EXPECT_EQ(project(Fact{"R", {"1", "2", "1", "3"}}, a, {"x", "z"}), (Tuple{"1", "3"}));
}

TEST(Project, IdentityAndEmpty) {
    EXPECT_EQ(project(Fact{"R", {"1", "2"}}, parse_atom("R(x,y)"), {"x", "y"}), (Tuple{"1", "2"}));
    EXPECT_EQ(project(Fact{"R", {"7"}}, parse_atom("R(x)"), {}), Tuple{});
}

TEST(Project, Errors) {
    try {
        project(Fact{"R", {"1", "2"}}, parse_atom("R(x,x)"), {"x"});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotConforming);
    }
    try {
        project(Fact{"R", {"1", "2"}}, parse_atom("R(x,y)"), {"w"});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::VariableAbsent);
    }
}

TEST(Project, Concatenation) {
    std::mt19937 rng(5);
    Atom a = parse_atom("R(x,y,2,x,z,w)");
    std::vector<std::string> vars{"x", "y", "z", "w"};
    for (int i = 0; i < 200; ++i) {
        Fact f{"R", {std::to_string(rng() % 3), std::to_string(rng() % 3), "2", "", std::to_string(rng() % 3),
                     std::to_string(rng() % 3)}};
        f.values[3] = f.values[0];
        std::shuffle(vars.begin(), vars.end(), rng);
        std::size_t cut = rng() % 5;
        std::vector<std::string> v1(vars.begin(), vars.begin() + static_cast<long>(cut));
        std::vector<std::string> v2(vars.begin() + static_cast<long>(cut), vars.end());
        Tuple whole = project(f, a, vars), left = project(f, a, v1), right = project(f, a, v2);
        left.insert(left.end(), right.begin(), right.end());
        EXPECT_EQ(whole, left);
    }
}

TEST(JoinKey, GuardOrder) {
    EXPECT_EQ(join_key(parse_atom("R(x,y)"), parse_atom("S(y,x)")), (std::vector<std::string>{"x", "y"}));
    EXPECT_EQ(join_key(parse_atom("R(x,y)"), parse_atom("T(x,z)")), (std::vector<std::string>{"x"}));
    EXPECT_TRUE(join_key(parse_atom("R(x,y)"), parse_atom("U(w)")).empty());
}

TEST(DependencyGraph, BranchedChain) {
    DependencyGraph g = dependency_graph(branched_chain());
    EXPECT_EQ(g.nodes, 5u);
    std::set<std::pair<std::size_t, std::size_t>> expected{{0, 1}, {1, 2}, {3, 4}, {2, 4}};
    EXPECT_EQ(g.edges, expected);
    EXPECT_EQ(g.predecessors(4), (std::vector<std::size_t>{2, 3}));
    EXPECT_EQ(g.successors(0), (std::vector<std::size_t>{1}));
}

TEST(DependencyGraph, SingleAndIndependent) {
    EXPECT_TRUE(dependency_graph(parse_program("Z := SELECT x FROM R(x);")).edges.empty());
    DependencyGraph g = dependency_graph(parse_program("A := SELECT x FROM R(x); B := SELECT x FROM S(x);"));
    EXPECT_EQ(g.nodes, 2u);
    EXPECT_TRUE(g.edges.empty());
}

TEST(DependencyGraph, EdgesGoForward) {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        std::string text;
        std::size_t n = 1 + rng() % 7;
        for (std::size_t i = 0; i < n; ++i) {
            std::string guard = i && rng() % 2 ? "Z" + std::to_string(rng() % i) : "R";
            std::string cond = i && rng() % 2 ? "Z" + std::to_string(rng() % i) : "S";
            text += "Z" + std::to_string(i) + " := SELECT x FROM " + guard + "(x) WHERE " + cond + "(x);\n";
        }
        DependencyGraph g = dependency_graph(parse_program(text));
        for (auto [u, v] : g.edges)
            EXPECT_LT(u, v);
    }
}

TEST(PrettyPrint, SampleProgramsRoundTrip) {
    for (const auto& src : kSamplePrograms) {
        SgfQuery q = parse_program(src);
        EXPECT_TRUE(validate(q).ok()) << src;
        EXPECT_EQ(parse_program(pretty_print(q)), q) << src;
    }
    std::string text = pretty_print(parse_program(kSamplePrograms.back()));
    EXPECT_NE(text.find("S(1, x)"), std::string::npos);
    EXPECT_NE(text.find("R(x, y, 4)"), std::string::npos);
}

TEST(PrettyPrint, NoWhereEmitted) {
    SgfQuery q = parse_program("Z := SELECT x FROM R(x,y);");
    std::string text = pretty_print(q);
    EXPECT_EQ(text.find("WHERE"), std::string::npos);
    EXPECT_EQ(parse_program(text), q);
}

TEST(PrettyPrint, QuotedConstantsSurvive) {
    SgfQuery q = parse_program(R"(Z := SELECT x FROM R(x, "a b", "q\"x", "007x") WHERE S(x, "\\");)");
    EXPECT_EQ(parse_program(pretty_print(q)), q);
}

TEST(PrettyPrint, RandomRoundTrip) {
    std::mt19937 rng(17);
    for (int i = 0; i < 300; ++i) {
        SgfQuery q = test::random_bsgf(rng).query;
        EXPECT_EQ(parse_program(pretty_print(q)), q) << pretty_print(q);
    }
}

TEST(Datum, Canonicalization) {
    EXPECT_EQ(canonical_datum("007"), "7");
    EXPECT_EQ(canonical_datum("-0"), "0");
    EXPECT_EQ(canonical_datum("+12"), "12");
    EXPECT_EQ(canonical_datum("-012"), "-12");
    EXPECT_EQ(canonical_datum("x07"), "x07");
    EXPECT_EQ(canonical_datum(""), "");
    EXPECT_TRUE(is_integer_literal("-5"));
    EXPECT_FALSE(is_integer_literal("5a"));
}
