#pragma once

#include <cstdint>
#include <string>

#include "shardsym/symcore/expr.hpp"

namespace shardsym::sym {

/// Inclusive range every integer variable ranges over.
struct Domain {
  std::int32_t lo = -1024;
  std::int32_t hi = 1023;
};

struct SolverConfig {
  Domain domain;
  int vars_max = 16;
  /// Upper bound on search nodes per query before giving up with Unknown.
  std::uint64_t search_budget = 20'000'000;
  /// Largest DNF (number of conjuncts) built before falling back to plain search.
  std::size_t dnf_max = 4096;
};

struct SolverVerdict {
  enum class Status { Sat, Unsat, Unknown };

  Status status = Status::Unknown;
  Assignment model;     // Sat only
  std::string reason;   // Unknown only

  bool sat() const { return status == Status::Sat; }
  bool unsat() const { return status == Status::Unsat; }
  bool unknown() const { return status == Status::Unknown; }
};

/// Decides a constraint over the configured domain.
///
/// Top-level conjuncts are first grouped by shared variables and each group
/// is decided on its own. Each group is normalized to a disjunction of conjunctions of integer
/// comparisons. Each conjunction is narrowed by interval propagation over its
/// linear comparisons and then searched variable by variable, smallest value
/// first, so a Sat verdict always carries the lexicographically smallest model
/// (variables ordered by VarKey). Unknown is returned only when a group's
/// variable count exceeds `vars_max` or the search budget runs out.
SolverVerdict check_sat(const Sym& constraint, const SolverConfig& cfg = {});

/// Convenience: conjunction of a path condition and extra constraints.
SolverVerdict check_sat(const PathCondition& pc, const SolverConfig& cfg = {});

}  // namespace shardsym::sym
