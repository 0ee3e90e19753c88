#pragma once

#include "sgf/query.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sgf {

/// Bytes one tuple occupies in the TSV on-disk format: values, tab separators
/// and the trailing newline.
std::size_t serialized_size(std::span<const std::string> values);

inline double to_mb(double bytes) { return bytes / 1048576.0; }

/// A set of equal-arity tuples, kept sorted and duplicate-free.
class Relation {
public:
    Relation() = default;
    explicit Relation(std::size_t arity) : arity_(arity) {}
    /// Sorts and deduplicates; throws ArityMismatch on a ragged tuple.
    Relation(std::size_t arity, std::vector<Tuple> tuples);

    std::size_t arity() const noexcept { return arity_; }
    std::size_t size() const noexcept { return tuples_.size(); }
    bool empty() const noexcept { return tuples_.empty(); }
    const std::vector<Tuple>& tuples() const noexcept { return tuples_; }
    const Tuple& operator[](std::size_t i) const { return tuples_[i]; }

    bool contains(std::span<const std::string> values) const;
    /// Returns false when the tuple was already present.
    bool insert(Tuple values);

    std::size_t serialized_bytes() const noexcept { return bytes_; }

    /// Ordinal used to reference tuples across jobs (the "file" of a tuple id).
    std::uint32_t file_id() const noexcept { return file_id_; }
    void set_file_id(std::uint32_t id) noexcept { file_id_ = id; }

    bool operator==(const Relation& o) const { return arity_ == o.arity_ && tuples_ == o.tuples_; }

private:
    std::size_t arity_ = 0;
    std::vector<Tuple> tuples_;
    std::size_t bytes_ = 0;
    std::uint32_t file_id_ = 0;
};

/// Named relations. Copies share relation storage, so extending a copy with
/// derived relations is cheap.
class Database {
public:
    /// Adds or replaces a relation and assigns it a fresh file id.
    void put(const std::string& name, Relation relation);
    void add_fact(const Fact& fact);

    bool has(std::string_view name) const;
    const Relation* find(std::string_view name) const;
    /// Throws UnknownRelation.
    const Relation& at(std::string_view name) const;

    std::vector<std::string> names() const;
    std::size_t relation_count() const noexcept { return relations_.size(); }
    std::size_t fact_count() const;

private:
    std::map<std::string, std::shared_ptr<const Relation>, std::less<>> relations_;
    std::uint32_t next_file_id_ = 1;
};

} // namespace sgf
