#pragma once

#include "sgf/query.hpp"

#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sgf {

enum class ViolationKind {
    GuardednessViolation,
    OutputVarNotInGuard,
    ForwardReference,
    ArityMismatch,
    DuplicateOutputName,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    std::size_t query = 0; // index of the offending BSGF
    std::vector<Atom> atoms;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    std::vector<std::string> warnings;

    bool ok() const noexcept { return violations.empty(); }
    bool has(ViolationKind kind) const;
};

ValidationReport validate(const SgfQuery& q);

/// Throws Error(Validation) carrying the first violation when `q` is invalid.
void require_valid(const SgfQuery& q);

bool conforms(const Fact& f, const Atom& a);
/// Value-tuple form; the relation name is assumed to match.
bool conforms(std::span<const std::string> values, const Atom& a);

/// Values at the first occurrence of each variable. Throws NotConforming or
/// VariableAbsent.
Tuple project(const Fact& f, const Atom& a, const std::vector<std::string>& vars);

/// Variables shared by both atoms, ordered by first occurrence in `guard`.
std::vector<std::string> join_key(const Atom& guard, const Atom& cond);

/// Compiled form of an atom for repeated conformance tests and projections.
class AtomPattern {
public:
    AtomPattern() = default;
    explicit AtomPattern(const Atom& a);

    std::size_t arity() const noexcept { return arity_; }
    bool matches(std::span<const std::string> values) const;
    /// First-occurrence positions of `vars`; throws VariableAbsent.
    std::vector<std::size_t> positions(const std::vector<std::string>& vars) const;

    /// Canonical description independent of variable names: two atoms with
    /// equal signatures accept the same facts.
    std::string signature() const;

private:
    std::size_t arity_ = 0;
    std::vector<std::pair<std::size_t, std::string>> constants_;
    std::vector<std::pair<std::size_t, std::size_t>> equalities_; // (position, earlier position)
    std::vector<std::pair<std::string, std::size_t>> first_;      // variable -> first position
    std::string relation_;
};

Tuple pick(std::span<const std::string> values, std::span<const std::size_t> positions);

struct DependencyGraph {
    std::size_t nodes = 0;
    std::set<std::pair<std::size_t, std::size_t>> edges;

    std::vector<std::size_t> predecessors(std::size_t v) const;
    std::vector<std::size_t> successors(std::size_t v) const;
};

/// Edge (i, j) whenever Z_i is mentioned in the guard or condition of Q_j.
DependencyGraph dependency_graph(const SgfQuery& q);

} // namespace sgf
