#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "shardsym/divide/summary.hpp"
#include "shardsym/interp/interp.hpp"

namespace shardsym {

/// One summary frame a path event sits in. `call` is the CallSite feature, in
/// the caller's own terms, through which this frame was entered (unused for main).
struct FrameRef {
  std::string function;
  std::string summary_key;
  int entry = -1;
  Feature call;
};

enum class PathEventKind { Malloc, Free, Access, DbQuery, Fault, End };

const char* to_string(PathEventKind k);

struct PathEvent {
  PathEventKind kind = PathEventKind::Malloc;
  SourceLoc loc;
  CallChain chain;
  std::vector<FrameRef> frames;     // main first
  size_t guard_len = 0;             // prefix of the innermost frame's entry guard in force
  sym::BlockId block = -1;          // -1: null or unknown
  std::string origin;               // main-terms origin text
  std::string record;               // Malloc: allocated type; Access: expected type; Free: type of the freed block
  int size = 0;
  sym::Placement placement;
  sym::TaintString query;           // DbQuery, in main terms
  std::optional<FaultKind> fault;   // Fault; or the heap fault this event raises on the simulated heap
};

/// A depth-first interleaving of the features of one main summary entry with
/// every callee entry spliced in, on one choice of heap placements.
struct FeaturePath {
  int main_entry = -1;
  std::vector<PathEvent> events;
  /// Values read from the heap, pinned to what the path stored there:
  /// (number of events before the read, constraint in main terms).
  std::vector<std::pair<size_t, sym::Sym>> bindings;
  sym::PathCondition guard;   // the main entry's guard
  bool truncated = false;
};

struct PathStats {
  long long paths = 0;
  long long pruned = 0;
  bool truncated = false;
  std::set<std::string> warnings;
};

/// Streams every feature path of main. Returns false from `sink` to stop early.
PathStats enumerate_feature_paths(const TypedProgram& p, const ProgramSummaries& s, const AnalysisConfig& cfg,
                                  const std::function<bool(std::shared_ptr<const FeaturePath>)>& sink);

}  // namespace shardsym
