#include "sgf/templates.hpp"

#include "sgf/error.hpp"

namespace sgf {

namespace {

// C1-C4 reproduce the shape of the multi-query benchmarks (independent
// queries sharing atoms, parallel chains, a deeper DAG that reuses earlier
// outputs, two levels with heavy atom overlap); the exact texts are ours.
std::map<std::string, std::string> make_templates() {
    const std::string g = "SELECT x, y, z, w FROM ";
    std::map<std::string, std::string> t;
    t["A1"] = "Q1 := " + g + "R(x,y,z,w) WHERE S(x) AND T(y) AND U(z) AND V(w);\n";
    t["A2"] = "Q1 := " + g + "R(x,y,z,w) WHERE S(x) AND S(y) AND S(z) AND S(w);\n";
    t["A3"] = "Q1 := " + g + "R(x,y,z,w) WHERE S(x) AND T(x) AND U(x) AND V(x);\n";
    t["A4"] = "Q1 := " + g + "R(x,y,z,w) WHERE S(x) AND T(y) AND U(z) AND V(w);\n"
              "Q2 := " + g + "G(x,y,z,w) WHERE W(x) AND X(y) AND Y(z) AND Z(w);\n";
    t["A5"] = "Q1 := " + g + "R(x,y,z,w) WHERE S(x) AND T(y) AND U(z) AND V(w);\n"
              "Q2 := " + g + "G(x,y,z,w) WHERE S(x) AND T(y) AND U(z) AND V(w);\n";
    t["B1"] = "Q1 := " + g + "R(x,y,z,w) WHERE\n"
              "  S(x) AND T(x) AND U(x) AND V(x) AND\n"
              "  S(y) AND T(y) AND U(y) AND V(y) AND\n"
              "  S(z) AND T(z) AND U(z) AND V(z) AND\n"
              "  S(w) AND T(w) AND U(w) AND V(w);\n";
    t["B2"] = "Q1 := " + g + "R(x,y,z,w) WHERE\n"
              "     (S(x) AND NOT T(x) AND NOT U(x) AND NOT V(x))\n"
              "  OR (NOT S(x) AND T(x) AND NOT U(x) AND NOT V(x))\n"
              "  OR (NOT S(x) AND NOT T(x) AND U(x) AND NOT V(x))\n"
              "  OR (NOT S(x) AND NOT T(x) AND NOT U(x) AND V(x));\n";
    t["C1"] = "Z1 := " + g + "R(x,y,z,w) WHERE S(x) AND T(y);\n"
              "Z2 := " + g + "G(x,y,z,w) WHERE S(x) AND U(z);\n"
              "Z3 := " + g + "R(x,y,z,w) WHERE T(y) AND V(w);\n";
    t["C2"] = "Z1 := " + g + "R(x,y,z,w) WHERE S(x) AND T(y);\n"
              "Z2 := " + g + "Z1(x,y,z,w) WHERE U(z) OR V(w);\n"
              "Z3 := " + g + "G(x,y,z,w) WHERE S(x) AND U(z);\n"
              "Z4 := " + g + "Z3(x,y,z,w) WHERE NOT T(y) AND V(w);\n"
              "Z5 := " + g + "R(x,y,z,w) WHERE T(y) OR U(z);\n"
              "Z6 := " + g + "Z5(x,y,z,w) WHERE S(x) AND NOT V(w);\n";
    t["C3"] = "Z1 := " + g + "R(x,y,z,w) WHERE S(x) AND T(y);\n"
              "Z2 := " + g + "R(x,y,z,w) WHERE U(z) AND V(w);\n"
              "Z3 := " + g + "Z1(x,y,z,w) WHERE Z2(x,y,z,w) OR W(x);\n"
              "Z4 := " + g + "G(x,y,z,w) WHERE X(y) AND NOT S(z);\n"
              "Z5 := " + g + "Z3(x,y,z,w) WHERE Y(z) AND NOT Z2(x,y,z,w);\n"
              "Z6 := " + g + "Z4(x,y,z,w) WHERE Z1(x,y,z,w) OR T(w);\n";
    t["C4"] = "Z1 := " + g + "R(x,y,z,w) WHERE S(x) AND T(y) AND U(z);\n"
              "Z2 := " + g + "G(x,y,z,w) WHERE S(x) AND T(y) AND V(w);\n"
              "Z3 := " + g + "R(x,y,z,w) WHERE T(y) AND U(z) AND V(w);\n"
              "Z4 := " + g + "Z1(x,y,z,w) WHERE (S(y) AND V(w)) OR (S(y) AND Z3(x,y,z,w));\n"
              "Z5 := " + g + "G(x,y,z,w) WHERE Z2(x,y,z,w) AND U(z) AND NOT T(w);\n";
    return t;
}

} // namespace

const std::map<std::string, std::string>& builtin_templates() {
    static const std::map<std::string, std::string> t = make_templates();
    return t;
}

const std::string& template_text(const std::string& id) {
    const auto& t = builtin_templates();
    auto it = t.find(id);
    if (it == t.end())
        throw Error(ErrorCode::UnknownTemplate, "unknown template '" + id + "'");
    return it->second;
}

} // namespace sgf
