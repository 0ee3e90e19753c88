#include "sgf/runtime.hpp"

#include "sgf/encoding.hpp"
#include "sgf/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <queue>
#include <thread>

namespace sgf {

std::size_t split_count(double mb, double split_size_mb) {
    return static_cast<std::size_t>(std::max(1.0, std::ceil(mb / split_size_mb)));
}

std::vector<std::pair<std::size_t, std::size_t>> split_ranges(std::size_t records, std::size_t splits) {
    splits = std::max<std::size_t>(1, splits);
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(splits);
    std::size_t base = records / splits, extra = records % splits, begin = 0;
    for (std::size_t i = 0; i < splits; ++i) {
        std::size_t len = base + (i < extra ? 1 : 0);
        out.emplace_back(begin, begin + len);
        begin += len;
    }
    return out;
}

std::uint64_t stable_hash(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull; // FNV-1a
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure)
                    failure = std::current_exception();
                next = n;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(threads, n); ++t)
        pool.emplace_back(worker);
    for (auto& th : pool)
        th.join();
    if (failure)
        std::rethrow_exception(failure);
}

bool JobMetrics::operator==(const JobMetrics& o) const {
    auto same_inputs = [&] {
        if (inputs.size() != o.inputs.size())
            return false;
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            const auto &a = inputs[i], &b = o.inputs[i];
            if (a.relation != b.relation || a.bytes != b.bytes || a.records != b.records ||
                a.map_output_bytes != b.map_output_bytes || a.map_output_records != b.map_output_records ||
                a.mappers != b.mappers)
                return false;
        }
        return true;
    };
    return id == o.id && round == o.round && same_inputs() && input_bytes == o.input_bytes &&
           map_output_bytes == o.map_output_bytes && map_output_records == o.map_output_records &&
           shuffle_bytes == o.shuffle_bytes && reduce_output_bytes == o.reduce_output_bytes &&
           reduce_output_records == o.reduce_output_records && reducers == o.reducers && groups == o.groups &&
           estimated_cost == o.estimated_cost && measured_cost == o.measured_cost;
}

namespace {

std::string printable(std::string_view key) {
    std::string out;
    for (char c : key) {
        if (c == kArityMark)
            out += ':';
        else if (c == '\x1f')
            out += ',';
        else if (static_cast<unsigned char>(c) < 0x20)
            out += '?';
        else
            out += c;
    }
    return out;
}

struct TaskOutput {
    std::size_t input = 0;
    std::vector<std::pair<std::string, std::string>> pairs;
    std::vector<std::vector<Tuple>> writes;
    double bytes = 0;
    double records = 0;
};

struct ReducerOutput {
    std::vector<std::vector<Tuple>> tuples;
    double bytes = 0;
    double records = 0;
    std::size_t groups = 0;
};

} // namespace

JobResult run_job(const RelationResolver& resolve, const JobSpec& job, const RuntimeConfig& cfg) {
    JobResult result;
    JobMetrics& m = result.metrics;
    m.id = job.id;
    m.label = job.label;
    m.estimated_cost = job.estimated_cost;

    // Plan map tasks: contiguous splits of every input.
    struct Task {
        std::size_t input;
        const Relation* rel;
        std::size_t begin, end;
    };
    std::vector<Task> tasks;
    for (std::size_t i = 0; i < job.inputs.size(); ++i) {
        const Relation* rel = resolve(job.inputs[i].relation);
        if (!rel)
            throw Error(ErrorCode::UnknownRelation,
                        "job " + job.id + ": unknown input relation '" + job.inputs[i].relation + "'");
        InputMetrics in;
        in.relation = job.inputs[i].relation;
        in.bytes = static_cast<double>(rel->serialized_bytes());
        in.records = static_cast<double>(rel->size());
        in.mappers = cfg.map_tasks ? cfg.map_tasks : split_count(cfg.cost.mb(in.bytes), cfg.cost.split_size);
        for (auto [b, e] : split_ranges(rel->size(), in.mappers))
            tasks.push_back({i, rel, b, e});
        m.inputs.push_back(in);
        m.input_bytes += in.bytes;
    }

    std::vector<TaskOutput> task_out(tasks.size());
    parallel_for(tasks.size(), cfg.threads, [&](std::size_t t) {
        const Task& task = tasks[t];
        MapEmitter em(job.outputs.size());
        for (std::size_t k = task.begin; k < task.end; ++k)
            job.map(MapRecord{task.input, (*task.rel)[k], task.rel->file_id(), k}, em);
        TaskOutput& out = task_out[t];
        out.input = task.input;
        out.pairs = std::move(em.pairs());
        out.writes = std::move(em.writes());
        for (const auto& [k, v] : out.pairs)
            out.bytes += static_cast<double>(k.size() + v.size());
        out.records = static_cast<double>(out.pairs.size());
    });

    for (const auto& t : task_out) {
        m.inputs[t.input].map_output_bytes += t.bytes;
        m.inputs[t.input].map_output_records += t.records;
        m.map_output_bytes += t.bytes;
        m.map_output_records += t.records;
    }

    std::vector<std::vector<Tuple>> collected(job.outputs.size());
    std::vector<InputCostPart> parts;
    for (const auto& in : m.inputs) {
        InputCostPart p = make_part(in.bytes, in.map_output_bytes, in.map_output_records, cfg.cost);
        p.m = static_cast<double>(in.mappers);
        parts.push_back(p);
    }

    if (job.map_only) {
        for (auto& t : task_out)
            for (std::size_t o = 0; o < t.writes.size(); ++o)
                for (auto& tuple : t.writes[o])
                    collected[o].push_back(std::move(tuple));
    } else {
        m.shuffle_bytes = m.map_output_bytes;
        std::size_t r = cfg.reducers ? cfg.reducers
                                     : static_cast<std::size_t>(reducers_for(cfg.cost.mb(m.map_output_bytes), cfg.cost));
        m.reducers = r;
        std::vector<std::vector<std::pair<std::string, std::string>>> buckets(r);
        for (auto& t : task_out)
            for (auto& kv : t.pairs)
                buckets[stable_hash(kv.first) % r].push_back(std::move(kv));
        task_out.clear();

        std::vector<ReducerOutput> red_out(r);
        parallel_for(r, cfg.threads, [&](std::size_t b) {
            auto& bucket = buckets[b];
            std::sort(bucket.begin(), bucket.end());
            bucket.erase(std::unique(bucket.begin(), bucket.end()), bucket.end());
            ReducerOutput& out = red_out[b];
            out.tuples.resize(job.outputs.size());
            std::vector<std::string> values;
            for (std::size_t g = 0; g < bucket.size();) {
                std::size_t h = g;
                values.clear();
                while (h < bucket.size() && bucket[h].first == bucket[g].first)
                    values.push_back(std::move(bucket[h++].second));
                ReduceEmitter em(job.outputs.size());
                try {
                    job.reduce(bucket[g].first, values, em);
                } catch (const std::exception& e) {
                    throw Error(ErrorCode::ReduceError,
                                "job " + job.id + ", key '" + printable(bucket[g].first) + "': " + e.what());
                }
                for (std::size_t o = 0; o < job.outputs.size(); ++o) {
                    auto& ts = em.outputs()[o];
                    std::sort(ts.begin(), ts.end());
                    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
                    for (auto& tuple : ts) {
                        out.bytes += static_cast<double>(serialized_size(tuple));
                        out.records += 1;
                        out.tuples[o].push_back(std::move(tuple));
                    }
                }
                ++out.groups;
                g = h;
            }
        });
        for (auto& ro : red_out) {
            m.reduce_output_bytes += ro.bytes;
            m.reduce_output_records += ro.records;
            m.groups += ro.groups;
            for (std::size_t o = 0; o < ro.tuples.size(); ++o)
                for (auto& tuple : ro.tuples[o])
                    collected[o].push_back(std::move(tuple));
        }
    }

    for (std::size_t o = 0; o < job.outputs.size(); ++o) {
        result.outputs.emplace_back(job.outputs[o].arity, std::move(collected[o]));
        if (job.map_only) {
            m.reduce_output_bytes += static_cast<double>(result.outputs.back().serialized_bytes());
            m.reduce_output_records += static_cast<double>(result.outputs.back().size());
        }
    }

    m.measured = job.map_only ? job_cost_map_only(parts, cfg.cost.mb(m.reduce_output_bytes), cfg.cost)
                              : job_cost_gumbo(parts, cfg.cost.mb(m.reduce_output_bytes), static_cast<double>(m.reducers),
                                               cfg.cost);
    m.measured_cost = m.measured.total;
    return result;
}

JobResult run_job(const Database& db, const JobSpec& job, const RuntimeConfig& cfg) {
    return run_job([&](std::string_view name) { return db.find(name); }, job, cfg);
}

DagShape analyze(const PlanDag& plan, const std::function<bool(std::string_view)>& is_base) {
    const std::size_t n = plan.jobs.size();
    std::map<std::string, std::size_t, std::less<>> producer;
    for (std::size_t j = 0; j < n; ++j)
        for (const auto& o : plan.jobs[j].outputs)
            if (!producer.emplace(o.relation, j).second)
                throw Error(ErrorCode::InvalidPlan, "relation " + o.relation + " produced by two jobs");

    std::map<std::string, std::size_t, std::less<>> by_id;
    for (std::size_t j = 0; j < n; ++j)
        by_id.emplace(plan.jobs[j].id, j);

    DagShape shape;
    std::vector<std::vector<std::size_t>> succ(n);
    std::vector<std::size_t> indeg(n, 0);
    auto link = [&](std::size_t from, std::size_t to) {
        if (std::find(succ[from].begin(), succ[from].end(), to) != succ[from].end())
            return;
        shape.edges.emplace_back(from, to);
        succ[from].push_back(to);
        ++indeg[to];
    };
    for (std::size_t j = 0; j < n; ++j) {
        for (const auto& in : plan.jobs[j].inputs) {
            auto it = producer.find(in.relation);
            if (it == producer.end()) {
                if (!is_base(in.relation))
                    throw Error(ErrorCode::MissingUpstreamOutput,
                                "job " + plan.jobs[j].id + " reads " + in.relation + ", which nothing produces");
                continue;
            }
            link(it->second, j);
        }
        for (const auto& id : plan.jobs[j].after) {
            auto it = by_id.find(id);
            if (it == by_id.end())
                throw Error(ErrorCode::InvalidPlan, "job " + plan.jobs[j].id + " waits for unknown job " + id);
            link(it->second, j);
        }
    }

    shape.round.assign(n, 1);
    std::queue<std::size_t> ready;
    for (std::size_t j = 0; j < n; ++j)
        if (!indeg[j])
            ready.push(j);
    std::size_t seen = 0;
    while (!ready.empty()) {
        std::size_t j = ready.front();
        ready.pop();
        ++seen;
        for (std::size_t k : succ[j]) {
            shape.round[k] = std::max(shape.round[k], shape.round[j] + 1);
            if (--indeg[k] == 0)
                ready.push(k);
        }
    }
    if (seen != n)
        throw Error(ErrorCode::InvalidPlan, "job graph contains a cycle");
    for (std::size_t r : shape.round)
        shape.rounds = std::max(shape.rounds, r);
    return shape;
}

DagShape analyze(const PlanDag& plan, const Database& db) {
    return analyze(plan, [&](std::string_view name) { return db.has(name); });
}

bool PlanMetrics::operator==(const PlanMetrics& o) const {
    return jobs == o.jobs && total_cost == o.total_cost && net_cost == o.net_cost && input_bytes == o.input_bytes &&
           shuffle_bytes == o.shuffle_bytes && map_output_records == o.map_output_records &&
           rounds.size() == o.rounds.size();
}

PlanMetrics aggregate(std::vector<JobMetrics> jobs) {
    PlanMetrics pm;
    pm.jobs = std::move(jobs);
    std::size_t rounds = 0;
    for (const auto& j : pm.jobs)
        rounds = std::max(rounds, j.round);
    pm.rounds.resize(rounds);
    for (const auto& j : pm.jobs) {
        RoundMetrics& r = pm.rounds.at(j.round - 1);
        r.input_bytes += j.input_bytes;
        r.shuffle_bytes += j.shuffle_bytes;
        r.total_cost += j.measured_cost;
        r.max_cost = std::max(r.max_cost, j.measured_cost);
        pm.total_cost += j.measured_cost;
        pm.input_bytes += j.input_bytes;
        pm.shuffle_bytes += j.shuffle_bytes;
        pm.map_output_records += j.map_output_records;
    }
    for (const auto& r : pm.rounds)
        pm.net_cost += r.max_cost;
    return pm;
}

std::string PlanMetrics::to_json() const {
    nlohmann::ordered_json j;
    j["jobs"] = nlohmann::ordered_json::array();
    for (const auto& m : jobs) {
        nlohmann::ordered_json jm;
        jm["id"] = m.id;
        jm["label"] = m.label;
        jm["round"] = m.round;
        jm["input_bytes"] = m.input_bytes;
        jm["map_output_bytes"] = m.map_output_bytes;
        jm["map_output_records"] = m.map_output_records;
        jm["shuffle_bytes"] = m.shuffle_bytes;
        jm["reduce_output_bytes"] = m.reduce_output_bytes;
        jm["reducers"] = m.reducers;
        jm["cost"] = m.measured_cost;
        jm["estimated_cost"] = m.estimated_cost;
        jm["cost_breakdown"] = {{"overhead", m.measured.overhead},
                                {"map", m.measured.map},
                                {"map_parts", m.measured.map_parts},
                                {"reduce", m.measured.reduce}};
        auto& ins = jm["inputs"] = nlohmann::ordered_json::array();
        for (const auto& in : m.inputs)
            ins.push_back({{"relation", in.relation},
                           {"bytes", in.bytes},
                           {"records", in.records},
                           {"map_output_bytes", in.map_output_bytes},
                           {"map_output_records", in.map_output_records},
                           {"mappers", in.mappers}});
        j["jobs"].push_back(std::move(jm));
    }
    j["total_cost"] = total_cost;
    j["net_cost"] = net_cost;
    j["rounds"] = rounds.size();
    j["input_bytes"] = input_bytes;
    j["shuffle_bytes"] = shuffle_bytes;
    return j.dump(2);
}

PlanRun run_plan(const Database& db, const PlanDag& plan, const RuntimeConfig& cfg) {
    DagShape shape = analyze(plan, db);
    PlanRun run{db, {}};
    std::vector<JobMetrics> metrics(plan.jobs.size());
    for (std::size_t round = 1; round <= shape.rounds; ++round) {
        std::vector<std::size_t> in_round;
        for (std::size_t j = 0; j < plan.jobs.size(); ++j)
            if (shape.round[j] == round)
                in_round.push_back(j);
        std::vector<JobResult> results(in_round.size());
        RuntimeConfig inner = cfg;
        if (in_round.size() > 1)
            inner.threads = 1;
        const Database& snapshot = run.database;
        parallel_for(in_round.size(), in_round.size() > 1 ? cfg.threads : 1,
                     [&](std::size_t k) { results[k] = run_job(snapshot, plan.jobs[in_round[k]], inner); });
        for (std::size_t k = 0; k < in_round.size(); ++k) {
            const JobSpec& job = plan.jobs[in_round[k]];
            for (std::size_t o = 0; o < job.outputs.size(); ++o)
                run.database.put(job.outputs[o].relation, std::move(results[k].outputs[o]));
            results[k].metrics.round = round;
            metrics[in_round[k]] = std::move(results[k].metrics);
        }
    }
    run.metrics = aggregate(std::move(metrics));
    return run;
}

} // namespace sgf
