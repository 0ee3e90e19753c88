#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sgf {

/// Cost constants. Per-MB costs: l_r/l_w local read/write, h_r/h_w
/// distributed read/write, t transfer. Sizes in MB.
struct CostConstants {
    double l_r = 0.03;
    double l_w = 0.085;
    double h_r = 0.15;
    double h_w = 0.25;
    double t = 0.017;
    double cost_h = 5.0;
    double D = 10.0;
    double buf_map = 409.0;
    double buf_red = 512.0;
    double split_size = 128.0;
    double reducer_chunk = 256.0;
    double meta_bytes = 16.0; // per map output record
    double size_scale = 1.0;  // multiplies every byte count before conversion to MB

    double mb(double bytes) const { return bytes / 1048576.0 * size_scale; }

    /// Throws Error(Config) when a value is out of range.
    void check() const;

    /// Every constant zero except h_r = 1: any job then costs its input MB.
    static CostConstants input_only();
};

/// Sets a constant by name; returns false for an unknown key and throws
/// Error(Config) for a malformed value.
bool set_constant(CostConstants& c, std::string_view key, std::string_view value);

/// Parses `key = value` lines (`#` comments) on top of `base`.
CostConstants parse_constants(std::string_view text, CostConstants base = {});

double mappers_for(double n_mb, const CostConstants& c);
double reducers_for(double m_mb, const CostConstants& c);

/// One job input: N read, M emitted by its mappers, M_meta their
/// bookkeeping overhead, m mapper count. All sizes in MB.
struct InputCostPart {
    double N = 0;
    double M = 0;
    double M_meta = 0;
    double m = 1;
};

/// Builds a part from byte and record counts, deriving m and the metadata
/// volume from the constants.
InputCostPart make_part(double n_bytes, double m_bytes, double m_records, const CostConstants& c);

struct JobCostEstimate {
    std::vector<double> map_parts;
    double M = 0;
    double K = 0;
    double r = 1;
    double map = 0;
    double reduce = 0;
    double overhead = 0;
    double total = 0;
};

double map_merge_cost(const InputCostPart& p, const CostConstants& c);
double map_cost(const InputCostPart& p, const CostConstants& c);
double reduce_cost(double M, double K, double r, const CostConstants& c);

/// Map phase costed per input, so skewed inputs pay their own merge passes.
JobCostEstimate job_cost_gumbo(const std::vector<InputCostPart>& parts, double K, double r, const CostConstants& c);
/// Map phase costed on the pooled inputs.
JobCostEstimate job_cost_wang(const std::vector<InputCostPart>& parts, double K, double r, const CostConstants& c);
/// Job without a reduce phase: inputs read, outputs written by the mappers.
JobCostEstimate job_cost_map_only(const std::vector<InputCostPart>& parts, double K, const CostConstants& c);

// Closed forms over MB sizes, without metadata overhead.

/// cost_map(N, M) with mapper count derived from N.
double map_cost(double N, double M, const CostConstants& c);
/// cost_red(M, K) with reducer count derived from M.
double reduce_cost(double M, double K, const CostConstants& c);
/// One MSJ job over guard alpha and distinct conditionals kappa_i.
double msj_cost_shared_guard(double alpha, const std::vector<double>& kappas, const std::vector<double>& outputs,
                             const CostConstants& c);
/// The same equations run as separate single semi-join jobs.
double msj_cost_separate(double alpha, const std::vector<double>& kappas, const std::vector<double>& outputs,
                         const CostConstants& c);
double semijoin_cost(double alpha, double kappa, double output, const CostConstants& c);
/// EVAL over inputs X_0..X_n (X_0 the guard) producing `output` MB.
double eval_cost(const std::vector<double>& inputs, double output, const CostConstants& c);

} // namespace sgf
