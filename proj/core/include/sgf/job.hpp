#pragma once

#include "sgf/query.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sgf {

struct MapRecord {
    std::size_t input = 0; // index into JobSpec::inputs
    const Tuple& values;
    std::uint32_t file_id = 0;
    std::uint64_t ordinal = 0; // position of the tuple within its relation
};

class MapEmitter {
public:
    explicit MapEmitter(std::size_t outputs = 0) : writes_(outputs) {}

    void emit(std::string key, std::string value) { pairs_.emplace_back(std::move(key), std::move(value)); }
    /// Map-only jobs write tuples straight to an output relation.
    void write(std::size_t output, Tuple t) { writes_.at(output).push_back(std::move(t)); }
    /// Records bytes this input could contribute to the job output; used by
    /// the size estimator as an upper bound.
    void note_output_bound(double bytes) { output_bound_ += bytes; }

    std::vector<std::pair<std::string, std::string>>& pairs() noexcept { return pairs_; }
    std::vector<std::vector<Tuple>>& writes() noexcept { return writes_; }
    double output_bound() const noexcept { return output_bound_; }

private:
    std::vector<std::pair<std::string, std::string>> pairs_;
    std::vector<std::vector<Tuple>> writes_;
    double output_bound_ = 0;
};

class ReduceEmitter {
public:
    explicit ReduceEmitter(std::size_t outputs) : out_(outputs) {}

    void emit(std::size_t output, Tuple t) { out_.at(output).push_back(std::move(t)); }
    std::vector<std::vector<Tuple>>& outputs() noexcept { return out_; }

private:
    std::vector<std::vector<Tuple>> out_;
};

using MapFn = std::function<void(const MapRecord&, MapEmitter&)>;
/// Values arrive sorted by bytes with duplicates removed.
using ReduceFn = std::function<void(std::string_view key, const std::vector<std::string>& values, ReduceEmitter&)>;

struct JobInput {
    std::string relation;
    std::string role; // "guard", "cond", "eval", ... for reports only
};

struct JobOutput {
    std::string relation;
    std::size_t arity = 0;
};

/// How to build a superset of an output without running the job: the
/// projection of the facts of `source` conforming to `pattern` onto `vars`,
/// or their tuple ids when `ids` is set.
struct OutputBound {
    std::size_t output = 0;
    std::string source;
    Atom pattern;
    std::vector<std::string> vars;
    bool ids = false;
};

struct JobSpec {
    std::string id;
    std::string label;
    std::vector<JobInput> inputs;
    std::vector<JobOutput> outputs;
    MapFn map;
    ReduceFn reduce;
    bool map_only = false;
    std::vector<OutputBound> bounds;
    std::vector<std::string> after;     // job ids that must finish first, data or not
    std::vector<std::string> equations; // grouped equation names, for plan export
    double estimated_cost = 0;
};

} // namespace sgf
