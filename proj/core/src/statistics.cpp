#include "sgf/statistics.hpp"

#include "sgf/analysis.hpp"
#include "sgf/encoding.hpp"
#include "sgf/error.hpp"

#include <map>

namespace sgf {

namespace {
std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}
} // namespace

bool sampled(const SampleConfig& s, std::uint32_t file_id, std::uint64_t ordinal) {
    if (s.rate >= 1.0)
        return true;
    std::uint64_t h = splitmix(s.seed ^ splitmix((static_cast<std::uint64_t>(file_id) << 40) ^ ordinal));
    return static_cast<double>(h >> 11) * 0x1.0p-53 < s.rate;
}

JobStats estimate_job(const RelationResolver& resolve, const JobSpec& job, const CostConstants& c,
                      const SampleConfig& s) {
    if (!(s.rate > 0 && s.rate <= 1))
        throw Error(ErrorCode::Config, "sample_rate must lie in (0, 1]");
    JobStats st;
    double scale = 1.0 / s.rate;
    double m_total = 0;
    std::vector<InputCostPart> parts;
    for (std::size_t i = 0; i < job.inputs.size(); ++i) {
        const Relation* rel = resolve(job.inputs[i].relation);
        if (!rel)
            throw Error(ErrorCode::MissingStats,
                        "job " + job.id + ": no statistics for input '" + job.inputs[i].relation + "'");
        InputMetrics in;
        in.relation = job.inputs[i].relation;
        in.bytes = static_cast<double>(rel->serialized_bytes());
        in.records = static_cast<double>(rel->size());
        MapEmitter em(job.outputs.size());
        double bytes = 0, records = 0;
        for (std::size_t k = 0; k < rel->size(); ++k) {
            if (!sampled(s, rel->file_id(), k))
                continue;
            job.map(MapRecord{i, (*rel)[k], rel->file_id(), k}, em);
            for (const auto& [key, value] : em.pairs())
                bytes += static_cast<double>(key.size() + value.size());
            records += static_cast<double>(em.pairs().size());
            em.pairs().clear();
            for (auto& w : em.writes())
                w.clear();
        }
        in.map_output_bytes = bytes * scale;
        in.map_output_records = records * scale;
        st.output_bound_bytes += em.output_bound() * scale;
        parts.push_back(make_part(in.bytes, in.map_output_bytes, in.map_output_records, c));
        in.mappers = static_cast<std::size_t>(parts.back().m);
        m_total += parts.back().M;
        st.inputs.push_back(in);
    }
    double K = c.mb(st.output_bound_bytes);
    st.cost = job.map_only ? job_cost_map_only(parts, K, c) : job_cost_gumbo(parts, K, reducers_for(m_total, c), c);
    return st;
}

Relation materialize_bound(const Relation& source, const OutputBound& bound, std::size_t arity) {
    AtomPattern p(bound.pattern);
    std::vector<std::size_t> pos = p.positions(bound.vars);
    std::vector<Tuple> out;
    for (std::size_t k = 0; k < source.size(); ++k) {
        if (!p.matches(source[k]))
            continue;
        if (bound.ids)
            out.push_back({encode_tuple_id(source.file_id(), k)});
        else
            out.push_back(pick(source[k], pos));
    }
    return Relation(arity, std::move(out));
}

double annotate_estimates(PlanDag& plan, const Database& db, const CostConstants& c, const SampleConfig& s) {
    DagShape shape = analyze(plan, db);
    std::vector<std::size_t> order(plan.jobs.size());
    for (std::size_t j = 0; j < order.size(); ++j)
        order[j] = j;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return shape.round[a] < shape.round[b]; });

    // Virtual relations keep the file ids their real counterparts would get,
    // which only matters for tuple-id byte counts.
    Database virt = db;
    double total = 0;
    for (std::size_t j : order) {
        JobSpec& job = plan.jobs[j];
        auto resolve = [&](std::string_view name) { return virt.find(name); };
        job.estimated_cost = estimate_job(resolve, job, c, s).cost.total;
        total += job.estimated_cost;
        for (const auto& b : job.bounds) {
            const Relation* src = virt.find(b.source);
            if (!src)
                throw Error(ErrorCode::MissingStats, "no statistics for " + b.source);
            virt.put(job.outputs[b.output].relation, materialize_bound(*src, b, job.outputs[b.output].arity));
        }
    }
    return total;
}

} // namespace sgf
