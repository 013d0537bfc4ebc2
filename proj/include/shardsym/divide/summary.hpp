#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shardsym/divide/values.hpp"
#include "shardsym/frontend/parser.hpp"
#include "shardsym/symcore/heap.hpp"
#include "shardsym/symcore/solver.hpp"

namespace shardsym {

struct AnalysisConfig {
  int loop_bound = 8;
  int call_depth = 4;
  int paths_max = 4096;
  int trace_max = 10000;
  sym::SolverConfig solver;
  double timeout_s = 600;
  /// Drop branches the solver proves infeasible. Turning this off keeps
  /// infeasible paths around (they are later refuted by verification).
  bool prune_infeasible = true;
  /// Baseline only: maximum number of explored paths.
  long long baseline_paths_max = 1'000'000;
};

enum class FeatureKind { Malloc, Free, Access, DbQuery, CallSite, Store, Load };

const char* to_string(FeatureKind k);

/// A security-relevant event on one summary path. Its guard is the prefix of
/// the entry's path condition in force when the event happened
/// (`guard_len` literals).
struct Feature {
  FeatureKind kind = FeatureKind::Malloc;
  SourceLoc loc;
  size_t guard_len = 0;
  Origin origin;                  // Malloc: the new block; Free/Access/Store/Load: the target
  std::string record;             // Malloc: allocated type; Access: type the reference expects
  int size = 0;                   // Malloc
  std::string field;              // Store/Load
  std::optional<SymValue> value;  // Store: the stored value; Load: the fresh unknown it produced
  sym::TaintString query;         // DbQuery
  // CallSite
  std::string callee;
  std::string summary_key;
  int entry = -1;
  int site = -1;
  std::string tag;                // "c<site>.<n>/"
  std::vector<SymValue> args;
  int int_offset = 0;
  int str_offset = 0;
};

Feature instantiate(const Feature& f, const Instantiation& in);
/// The instantiation that maps a CallSite feature's callee into the caller.
Instantiation call_instantiation(const Feature& callsite, const FunctionDecl& callee);

/// An in-range weakness found while summarizing; the path ends there.
struct RangeFinding {
  FaultKind kind = FaultKind::OutOfBoundsAccess;
  SourceLoc loc;
  size_t guard_len = 0;
  std::string detail;
  int input_index = -1;   // UnsanitizedQuery: first unsanitized string input
};

struct SummaryEntry {
  sym::PathCondition guard;
  std::optional<SymValue> result;
  std::vector<Feature> features;
  std::optional<RangeFinding> fault;
  bool callee_fault = false;   // the path ends inside a callee's faulting entry
  int int_inputs = 0;          // input() calls on this path
  int str_inputs = 0;

  bool terminates() const { return fault.has_value() || callee_fault; }
  bool featureful() const { return !features.empty() || terminates(); }
};

struct FunctionSummary {
  std::string function;
  std::string key;     // function name, or "name@k" for recursion level k
  int level = -1;      // -1 outside recursion
  std::vector<SummaryEntry> entries;
  bool truncated = false;
  std::vector<std::string> warnings;

  bool featureful() const;
};

using SummaryTable = std::map<std::string, FunctionSummary>;

struct ProgramSummaries {
  SummaryTable table;
  std::map<std::string, std::string> final_key;   // function -> key callers use
  std::vector<std::string> warnings;

  const FunctionSummary& of(const std::string& function) const { return table.at(final_key.at(function)); }
};

struct SummaryBudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Summarizes every function bottom-up over the call graph.
ProgramSummaries summarize_program(const TypedProgram& p, const AnalysisConfig& cfg);

/// Summarizes one function given its callees' summaries. `callee_key` maps a
/// callee name to the summary key to apply, or nullopt to cut the recursion
/// (unknown result, no features).
FunctionSummary summarize_function(const TypedProgram& p, const FunctionDecl& f, const SummaryTable& summaries,
                                   const std::function<std::optional<std::string>(const std::string&)>& callee_key,
                                   const AnalysisConfig& cfg);

struct AppliedEntry {
  sym::PathCondition guard;          // callee guard in caller terms
  std::optional<SymValue> result;
  std::vector<Feature> features;     // instantiated
  std::vector<int> entries;          // callee entries this stands for (several when coalesced)
};

/// Applies a summary at a call: substitutes arguments into every entry, drops
/// entries infeasible under the caller's path condition and merges entries
/// that are indistinguishable to the caller (same result, no features, same
/// input counts) into one with the disjunction of their guards.
std::vector<AppliedEntry> apply_summary(const FunctionSummary& s, const FunctionDecl& callee,
                                        const std::vector<SymValue>& args, const sym::PathCondition& caller_pc,
                                        const AnalysisConfig& cfg, const std::string& tag = "c0.0/", int int_offset = 0,
                                        int str_offset = 0);

}  // namespace shardsym
