#include "sgf/plan_export.hpp"

#include "json.hpp"

#include <cstdio>
#include <sstream>

namespace sgf {

namespace {

std::string escape_dot(const std::string& s) {
    std::string out;
    for (char ch : s) {
        if (ch == '"' || ch == '\\')
            out += '\\';
        out += ch;
    }
    return out;
}

std::string fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

} // namespace

std::string to_dot(const Plan& plan, const Database& db) {
    DagShape shape = analyze(plan.dag, db);
    std::ostringstream os;
    os << "digraph plan {\n  rankdir=TB;\n  node [shape=box, fontname=\"monospace\"];\n";
    for (std::size_t j = 0; j < plan.dag.jobs.size(); ++j) {
        const JobSpec& job = plan.dag.jobs[j];
        std::string label = job.id + " " + job.label;
        for (const auto& e : job.equations)
            label += "\\n" + escape_dot(e);
        label += "\\nround " + std::to_string(shape.round[j]) + ", est. " + fixed(job.estimated_cost);
        os << "  " << job.id << " [label=\"" << label << "\"];\n";
    }
    for (auto [from, to] : shape.edges)
        os << "  " << plan.dag.jobs[from].id << " -> " << plan.dag.jobs[to].id << ";\n";
    os << "}\n";
    return os.str();
}

std::string to_json(const Plan& plan, const Database& db) {
    using nlohmann::ordered_json;
    DagShape shape = analyze(plan.dag, db);
    ordered_json j;
    j["strategy"] = std::string(to_string(plan.strategy));
    j["estimated_cost"] = plan.estimated_cost;
    j["rounds"] = shape.rounds;
    ordered_json stages = ordered_json::array();
    for (const auto& s : plan.stages)
        stages.push_back({{"nodes", s.nodes}, {"blocks", s.blocks}});
    j["stages"] = stages;
    ordered_json jobs = ordered_json::array();
    for (std::size_t k = 0; k < plan.dag.jobs.size(); ++k) {
        const JobSpec& job = plan.dag.jobs[k];
        ordered_json inputs = ordered_json::array(), outputs = ordered_json::array();
        for (const auto& in : job.inputs)
            inputs.push_back(in.relation);
        for (const auto& out : job.outputs)
            outputs.push_back(out.relation);
        jobs.push_back({{"id", job.id},
                        {"label", job.label},
                        {"stage", k < plan.job_stage.size() ? plan.job_stage[k] : 0},
                        {"round", shape.round[k]},
                        {"inputs", inputs},
                        {"outputs", outputs},
                        {"equations", job.equations},
                        {"estimated_cost", job.estimated_cost}});
    }
    j["jobs"] = jobs;
    j["warnings"] = plan.warnings;
    return j.dump(2);
}

} // namespace sgf
