#include "sgf/database.hpp"

#include "sgf/error.hpp"

#include <algorithm>

namespace sgf {

std::size_t serialized_size(std::span<const std::string> values) {
    std::size_t n = values.empty() ? 1 : values.size(); // separators + newline
    for (const auto& v : values)
        n += v.size();
    return n;
}

Relation::Relation(std::size_t arity, std::vector<Tuple> tuples) : arity_(arity), tuples_(std::move(tuples)) {
    for (const auto& t : tuples_)
        if (t.size() != arity_)
            throw Error(ErrorCode::ArityMismatch,
                        "tuple of arity " + std::to_string(t.size()) + " in relation of arity " + std::to_string(arity_));
    std::sort(tuples_.begin(), tuples_.end());
    tuples_.erase(std::unique(tuples_.begin(), tuples_.end()), tuples_.end());
    for (const auto& t : tuples_)
        bytes_ += serialized_size(t);
}

bool Relation::contains(std::span<const std::string> values) const {
    auto it = std::lower_bound(tuples_.begin(), tuples_.end(), values,
                               [](const Tuple& t, std::span<const std::string> v) {
                                   return std::lexicographical_compare(t.begin(), t.end(), v.begin(), v.end());
                               });
    return it != tuples_.end() && std::equal(it->begin(), it->end(), values.begin(), values.end());
}

bool Relation::insert(Tuple values) {
    if (values.size() != arity_)
        throw Error(ErrorCode::ArityMismatch, "tuple of arity " + std::to_string(values.size()) +
                                                  " in relation of arity " + std::to_string(arity_));
    auto it = std::lower_bound(tuples_.begin(), tuples_.end(), values);
    if (it != tuples_.end() && *it == values)
        return false;
    bytes_ += serialized_size(values);
    tuples_.insert(it, std::move(values));
    return true;
}

void Database::put(const std::string& name, Relation relation) {
    relation.set_file_id(next_file_id_++);
    relations_[name] = std::make_shared<const Relation>(std::move(relation));
}

void Database::add_fact(const Fact& fact) {
    auto it = relations_.find(fact.relation);
    Relation rel = it == relations_.end() ? Relation(fact.values.size()) : *it->second;
    if (it != relations_.end() && rel.empty() && rel.arity() != fact.values.size())
        rel = Relation(fact.values.size());
    std::uint32_t id = it == relations_.end() ? next_file_id_++ : rel.file_id();
    rel.insert(fact.values);
    rel.set_file_id(id);
    relations_[fact.relation] = std::make_shared<const Relation>(std::move(rel));
}

bool Database::has(std::string_view name) const { return relations_.find(name) != relations_.end(); }

const Relation* Database::find(std::string_view name) const {
    auto it = relations_.find(name);
    return it == relations_.end() ? nullptr : it->second.get();
}

const Relation& Database::at(std::string_view name) const {
    if (const Relation* r = find(name))
        return *r;
    throw Error(ErrorCode::UnknownRelation, "unknown relation '" + std::string(name) + "'");
}

std::vector<std::string> Database::names() const {
    std::vector<std::string> out;
    out.reserve(relations_.size());
    for (const auto& [name, _] : relations_)
        out.push_back(name);
    return out;
}

std::size_t Database::fact_count() const {
    std::size_t n = 0;
    for (const auto& [_, r] : relations_)
        n += r->size();
    return n;
}

} // namespace sgf
