#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "shardsym/frontend/parser.hpp"
#include "shardsym/symcore/heap.hpp"

namespace shardsym {

struct InputTape {
  std::vector<std::int32_t> ints;
  std::vector<std::string> strs;

  bool empty() const { return ints.empty() && strs.empty(); }
  bool operator==(const InputTape&) const = default;
};

/// One frame of a call chain: `function` was entered through call site
/// `site` of the previous frame's function (-1 for main).
struct CallFrame {
  std::string function;
  int site = -1;

  bool operator==(const CallFrame&) const = default;
  auto operator<=>(const CallFrame&) const = default;
};

using CallChain = std::vector<CallFrame>;

/// "main>f#0>g#1": callee names with the caller's call-site id.
std::string to_string(const CallChain& chain);

enum class EventKind { Malloc, Free, Access, DbQuery };

const char* to_string(EventKind k);

struct TraceEvent {
  EventKind kind = EventKind::Malloc;
  SourceLoc loc;
  CallChain chain;
  sym::BlockId block = -1;      // Malloc/Free/Access
  std::string record;           // Malloc: allocated type; Access: the type the reference expects
  int size = 0;                 // Malloc
  sym::Placement placement;     // Malloc
  std::string query;            // DbQuery: concrete text
};

/// A string value with per-segment provenance, so db_query can tell which
/// parts came from input_str() unsanitized.
struct ConcreteString {
  struct Part {
    std::string text;
    bool from_input = false;
    bool sanitized = false;
  };
  std::vector<Part> parts;

  std::string text() const;
};

struct RefValue {
  sym::BlockId block = -1;   // -1 is null
};

using Value = std::variant<std::int32_t, ConcreteString, RefValue, std::vector<std::int32_t>>;

struct RunOutcome {
  enum class Status { Completed, Fault, FuelExhausted };

  Status status = Status::Completed;
  FaultKind fault = FaultKind::UseAfterFree;   // Fault only
  SourceLoc fault_loc;
  CallChain fault_chain;
  std::string keyword;                         // UnsanitizedQuery only
  std::vector<TraceEvent> trace;
  /// Blocks still allocated when main returned, with their allocation event.
  std::vector<TraceEvent> leaks;
  std::optional<Value> result;                 // return value of the called function
  std::int64_t steps = 0;

  bool faulted() const { return status == Status::Fault; }
};

struct RunConfig {
  std::int64_t fuel = 1'000'000;
};

/// Keywords whose presence in unsanitized input makes a query injectable.
const std::vector<std::string>& sql_keywords();

/// Runs main. The allocator reuses the most recently freed block that is
/// large enough, so stale references into reused memory are observable.
RunOutcome run(const TypedProgram& p, const InputTape& tape, const RunConfig& cfg = {});

/// Runs one function with int arguments (functions whose parameters are all
/// int). Leaks are not computed.
RunOutcome call_function(const TypedProgram& p, const std::string& name, const std::vector<std::int32_t>& args,
                         const InputTape& tape, const RunConfig& cfg = {});

struct ExpectedFault {
  FaultKind kind;
  SourceLoc loc;
  CallChain chain;   // empty: any chain
};

/// Replays a witness; Confirmed iff the run faults with the expected kind at
/// the expected location (and call chain, when given). UseAfterFree and its
/// type-confused variant count as the same weakness class.
bool replay_witness(const TypedProgram& p, const InputTape& tape, const ExpectedFault& expected, const RunConfig& cfg = {});

bool same_weakness_class(FaultKind a, FaultKind b);

}  // namespace shardsym
