#include "sgf/cost_model.hpp"

#include "sgf/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace sgf {

void CostConstants::check() const {
    for (double v : {l_r, l_w, h_r, h_w, t, cost_h, meta_bytes})
        if (!(v >= 0) || !std::isfinite(v))
            throw Error(ErrorCode::Config, "cost constants must be finite and non-negative");
    if (!(D >= 2))
        throw Error(ErrorCode::Config, "merge factor D must be at least 2");
    for (double v : {buf_map, buf_red, split_size, reducer_chunk, size_scale})
        if (!(v > 0) || !std::isfinite(v))
            throw Error(ErrorCode::Config, "buffer, split and reducer sizes must be positive");
}

CostConstants CostConstants::input_only() {
    CostConstants c;
    c.l_r = c.l_w = c.h_w = c.t = c.cost_h = 0;
    c.h_r = 1;
    return c;
}

bool set_constant(CostConstants& c, std::string_view key, std::string_view value) {
    double* slot = nullptr;
    if (key == "l_r") slot = &c.l_r;
    else if (key == "l_w") slot = &c.l_w;
    else if (key == "h_r") slot = &c.h_r;
    else if (key == "h_w") slot = &c.h_w;
    else if (key == "t") slot = &c.t;
    else if (key == "cost_h") slot = &c.cost_h;
    else if (key == "D") slot = &c.D;
    else if (key == "buf_map") slot = &c.buf_map;
    else if (key == "buf_red") slot = &c.buf_red;
    else if (key == "split_size") slot = &c.split_size;
    else if (key == "reducer_chunk") slot = &c.reducer_chunk;
    else if (key == "meta_bytes") slot = &c.meta_bytes;
    else if (key == "size_scale") slot = &c.size_scale;
    if (!slot)
        return false;
    double v = 0;
    auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || end != value.data() + value.size())
        throw Error(ErrorCode::Config, "invalid number '" + std::string(value) + "' for " + std::string(key));
    *slot = v;
    return true;
}

namespace {
std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}
} // namespace

CostConstants parse_constants(std::string_view text, CostConstants base) {
    std::size_t lineno = 0;
    while (!text.empty()) {
        std::size_t nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw Error(ErrorCode::Config, "line " + std::to_string(lineno) + ": expected key=value");
        auto key = trim(line.substr(0, eq));
        if (!set_constant(base, key, trim(line.substr(eq + 1))))
            throw Error(ErrorCode::Config, "line " + std::to_string(lineno) + ": unknown key " + std::string(key));
    }
    base.check();
    return base;
}

double mappers_for(double n_mb, const CostConstants& c) { return std::max(1.0, std::ceil(n_mb / c.split_size)); }
double reducers_for(double m_mb, const CostConstants& c) {
    return std::max(1.0, std::ceil(m_mb / c.reducer_chunk));
}

InputCostPart make_part(double n_bytes, double m_bytes, double m_records, const CostConstants& c) {
    InputCostPart p;
    p.N = c.mb(n_bytes);
    p.M = c.mb(m_bytes);
    p.M_meta = c.mb(m_records * c.meta_bytes);
    p.m = mappers_for(p.N, c);
    return p;
}

namespace {
// log_D of the number of sorted runs, zero when everything fits one buffer.
double merge_passes(double per_task, double buffer, const CostConstants& c) {
    double runs = std::ceil(per_task / buffer);
    if (runs <= 1)
        return 0;
    return std::log(runs) / std::log(c.D);
}
} // namespace

double map_merge_cost(const InputCostPart& p, const CostConstants& c) {
    if (p.M <= 0)
        return 0;
    return (c.l_r + c.l_w) * p.M * merge_passes((p.M + p.M_meta) / p.m, c.buf_map, c);
}

double map_cost(const InputCostPart& p, const CostConstants& c) {
    return c.h_r * p.N + map_merge_cost(p, c) + c.l_w * p.M;
}

double reduce_cost(double M, double K, double r, const CostConstants& c) {
    double merge = M > 0 ? (c.l_r + c.l_w) * M * merge_passes(M / r, c.buf_red, c) : 0;
    return c.t * M + merge + c.h_w * K;
}

namespace {
JobCostEstimate finish(JobCostEstimate e, double K, double r, const CostConstants& c) {
    e.K = K;
    e.r = r;
    e.overhead = c.cost_h;
    e.reduce = reduce_cost(e.M, K, r, c);
    e.total = e.overhead + e.map + e.reduce;
    return e;
}
} // namespace

JobCostEstimate job_cost_gumbo(const std::vector<InputCostPart>& parts, double K, double r, const CostConstants& c) {
    JobCostEstimate e;
    for (const auto& p : parts) {
        double cost = map_cost(p, c);
        e.map_parts.push_back(cost);
        e.map += cost;
        e.M += p.M;
    }
    return finish(std::move(e), K, r, c);
}

JobCostEstimate job_cost_wang(const std::vector<InputCostPart>& parts, double K, double r, const CostConstants& c) {
    InputCostPart pooled;
    pooled.m = 0;
    for (const auto& p : parts) {
        pooled.N += p.N;
        pooled.M += p.M;
        pooled.M_meta += p.M_meta;
        pooled.m += p.m;
    }
    pooled.m = std::max(1.0, pooled.m);
    JobCostEstimate e;
    e.M = pooled.M;
    e.map = map_cost(pooled, c);
    e.map_parts.push_back(e.map);
    return finish(std::move(e), K, r, c);
}

JobCostEstimate job_cost_map_only(const std::vector<InputCostPart>& parts, double K, const CostConstants& c) {
    JobCostEstimate e;
    for (const auto& p : parts) {
        double cost = c.h_r * p.N;
        e.map_parts.push_back(cost);
        e.map += cost;
    }
    e.K = K;
    e.overhead = c.cost_h;
    e.reduce = c.h_w * K;
    e.total = e.overhead + e.map + e.reduce;
    return e;
}

double map_cost(double N, double M, const CostConstants& c) {
    return map_cost(InputCostPart{N, M, 0, mappers_for(N, c)}, c);
}

double reduce_cost(double M, double K, const CostConstants& c) { return reduce_cost(M, K, reducers_for(M, c), c); }

double msj_cost_shared_guard(double alpha, const std::vector<double>& kappas, const std::vector<double>& outputs,
                             const CostConstants& c) {
    double n = static_cast<double>(kappas.size());
    double cost = c.cost_h + map_cost(alpha, n * alpha, c);
    double shuffled = n * alpha;
    for (double k : kappas) {
        cost += map_cost(k, k, c);
        shuffled += k;
    }
    double out = 0;
    for (double x : outputs)
        out += x;
    return cost + reduce_cost(shuffled, out, c);
}

double msj_cost_separate(double alpha, const std::vector<double>& kappas, const std::vector<double>& outputs,
                         const CostConstants& c) {
    double cost = 0;
    for (std::size_t i = 0; i < kappas.size(); ++i)
        cost += semijoin_cost(alpha, kappas[i], i < outputs.size() ? outputs[i] : 0, c);
    return cost;
}

double semijoin_cost(double alpha, double kappa, double output, const CostConstants& c) {
    return msj_cost_shared_guard(alpha, {kappa}, {output}, c);
}

double eval_cost(const std::vector<double>& inputs, double output, const CostConstants& c) {
    double cost = c.cost_h;
    double total = 0;
    for (double x : inputs) {
        cost += map_cost(x, x, c);
        total += x;
    }
    return cost + reduce_cost(total, output, c);
}

} // namespace sgf
