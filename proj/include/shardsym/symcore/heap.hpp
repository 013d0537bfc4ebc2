#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace shardsym {

enum class FaultKind {
  UseAfterFree,
  TypeConfusedUseAfterFree,
  DoubleFree,
  OutOfBoundsAccess,
  InvalidFree,
  InvalidAccess,
  UnsanitizedQuery,
};

const char* to_string(FaultKind k);
std::optional<FaultKind> fault_kind_from_string(const std::string& s);

}  // namespace shardsym

namespace shardsym::sym {

using BlockId = int;

enum class BlockStatus { Allocated, Freed };

struct Placement {
  bool reuse = false;
  BlockId target = -1;   // the freed block whose memory is reused

  static Placement fresh() { return {}; }
  static Placement reuse_of(BlockId b) { return {true, b}; }
  bool operator==(const Placement&) const = default;
};

std::string to_string(const Placement& p);

struct HeapBlock {
  std::string record;
  BlockStatus status = BlockStatus::Allocated;
  int size = 0;
  Placement placement;
  BlockId occupant = -1;   // block currently placed in this block's freed memory
};

enum class AllocMode {
  FreshOnly,
  /// Fresh plus one successor per reusable freed block.
  AlsoReuse,
  /// The concrete allocator's rule: reuse the most recently freed block that
  /// is large enough, else allocate fresh.
  Deterministic,
};

struct HeapFault {
  FaultKind kind;
  BlockId block;
};

/// Abstract heap. A value type: every operation returns a new state.
class HeapState {
public:
  const std::map<BlockId, HeapBlock>& blocks() const { return blocks_; }
  const HeapBlock* block(BlockId id) const;
  BlockId next_id() const { return next_id_; }

  /// Freed blocks whose memory is not occupied, most recently freed last.
  std::vector<BlockId> reusable(int min_size) const;
  std::vector<BlockId> allocated() const;

  std::vector<std::pair<HeapState, BlockId>> alloc(const std::string& record, int size, AllocMode mode) const;
  std::variant<HeapState, HeapFault> free(BlockId id) const;
  std::optional<HeapFault> access(BlockId id, const std::string& expected_record) const;

  /// Registers a block of unknown provenance (a summarized function's
  /// reference parameter) as allocated without counting it as a fresh allocation.
  HeapState with_external(const std::string& record, int size, BlockId* id_out) const;
  bool is_external(BlockId id) const;

private:
  std::map<BlockId, HeapBlock> blocks_;
  std::vector<BlockId> free_order_;
  std::vector<BlockId> external_;
  BlockId next_id_ = 0;
};

std::vector<std::pair<HeapState, BlockId>> heap_alloc(const HeapState& h, const std::string& record, int size,
                                                      AllocMode mode);
std::variant<HeapState, HeapFault> heap_free(const HeapState& h, BlockId id);
std::optional<HeapFault> heap_access(const HeapState& h, BlockId id, const std::string& expected_record);

}  // namespace shardsym::sym
