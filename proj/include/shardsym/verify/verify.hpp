#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shardsym/conquer/conquer.hpp"

namespace shardsym {

enum class FindingStatus { Verified, Refuted, Unknown, Warning };

const char* to_string(FindingStatus s);

/// One matched event as reported.
struct FindingEvent {
  PathEventKind kind;
  SourceLoc loc;
  CallChain chain;
  std::string record;
  sym::Placement placement;
};

struct Finding {
  std::string model;
  std::string cwe;
  std::string severity;
  std::optional<FaultKind> fault;   // what a replay of the witness must raise
  FindingStatus status = FindingStatus::Unknown;
  std::string reason;               // Unknown: why; Refuted: the unsatisfiable step
  int refuted_step = -1;            // 0 = innermost frame
  SourceLoc loc;
  CallChain chain;
  InputTape witness;
  std::vector<FindingEvent> events;
  int candidates = 1;               // candidates merged into this finding
  double verify_ms = 0;
};

struct BackwardResult {
  FindingStatus status = FindingStatus::Unknown;
  int step = -1;               // Refuted: first unsatisfiable step
  std::string reason;
  sym::Assignment model;       // Verified
  sym::PathCondition constraint;   // the constraint solved at main
};

/// Solves the candidate's reachability condition outward from the key event:
/// step 0 is the innermost frame's guard prefix, each further step maps the
/// constraint through one call site and conjoins the caller's prefix at the
/// call; the last step adds the heap-read bindings at main.
BackwardResult backward_verify(const TypedProgram& p, const ProgramSummaries& s, const Candidate& c,
                               const AnalysisConfig& cfg);

/// Builds the input tape from a model. Int inputs come from the model (0 when
/// unconstrained); string inputs are empty except the unsanitized slot of an
/// injection, which gets the first keyword.
InputTape synthesize_tape(const sym::Assignment& model, int ints, int strs, std::optional<int> sqli_slot = std::nullopt);

/// Verifies one candidate, including the check that the concrete allocator
/// reproduces the candidate's heap placements under the synthesized tape.
Finding verify_candidate(const TypedProgram& p, const ProgramSummaries& s, const Candidate& c, const AnalysisConfig& cfg);

/// Verifies every candidate and merges those that share weakness, location and
/// call chain into one finding with the best status (Verified > Unknown >
/// Refuted). Warning-severity candidates are reported without verification.
/// Output is sorted by location, chain and weakness.
std::vector<Finding> verify_all(const TypedProgram& p, const ProgramSummaries& s, const std::vector<Candidate>& cands,
                                const AnalysisConfig& cfg);

}  // namespace shardsym
