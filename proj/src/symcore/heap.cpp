#include "shardsym/symcore/heap.hpp"

#include <algorithm>

namespace shardsym {

const char* to_string(FaultKind k) {
  switch (k) {
    case FaultKind::UseAfterFree: return "UseAfterFree";
    case FaultKind::TypeConfusedUseAfterFree: return "TypeConfusedUseAfterFree";
    case FaultKind::DoubleFree: return "DoubleFree";
    case FaultKind::OutOfBoundsAccess: return "OutOfBoundsAccess";
    case FaultKind::InvalidFree: return "InvalidFree";
    case FaultKind::InvalidAccess: return "InvalidAccess";
    case FaultKind::UnsanitizedQuery: return "UnsanitizedQuery";
  }
  return "?";
}

std::optional<FaultKind> fault_kind_from_string(const std::string& s) {
  for (FaultKind k : {FaultKind::UseAfterFree, FaultKind::TypeConfusedUseAfterFree, FaultKind::DoubleFree,
                      FaultKind::OutOfBoundsAccess, FaultKind::InvalidFree, FaultKind::InvalidAccess,
                      FaultKind::UnsanitizedQuery})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

}  // namespace shardsym

namespace shardsym::sym {

std::string to_string(const Placement& p) {
  return p.reuse ? "ReuseOf(" + std::to_string(p.target) + ")" : "Fresh";
}

const HeapBlock* HeapState::block(BlockId id) const {
  auto it = blocks_.find(id);
  return it == blocks_.end() ? nullptr : &it->second;
}

std::vector<BlockId> HeapState::reusable(int min_size) const {
  std::vector<BlockId> out;
  for (BlockId id : free_order_) {
    const HeapBlock& b = blocks_.at(id);
    if (b.status == BlockStatus::Freed && b.occupant < 0 && b.size >= min_size && !is_external(id)) out.push_back(id);
  }
  return out;
}

std::vector<BlockId> HeapState::allocated() const {
  std::vector<BlockId> out;
  for (const auto& [id, b] : blocks_)
    if (b.status == BlockStatus::Allocated && !is_external(id)) out.push_back(id);
  return out;
}

bool HeapState::is_external(BlockId id) const {
  return std::find(external_.begin(), external_.end(), id) != external_.end();
}

std::vector<std::pair<HeapState, BlockId>> HeapState::alloc(const std::string& record, int size, AllocMode mode) const {
  auto place = [&](Placement p) {
    HeapState next = *this;
    BlockId id = next.next_id_++;
    next.blocks_[id] = HeapBlock{record, BlockStatus::Allocated, size, p, -1};
    if (p.reuse) next.blocks_[p.target].occupant = id;
    return std::make_pair(std::move(next), id);
  };
  std::vector<std::pair<HeapState, BlockId>> out;
  std::vector<BlockId> candidates = reusable(size);
  switch (mode) {
    case AllocMode::FreshOnly: out.push_back(place(Placement::fresh())); break;
    case AllocMode::AlsoReuse:
      out.push_back(place(Placement::fresh()));
      for (BlockId b : candidates) out.push_back(place(Placement::reuse_of(b)));
      break;
    case AllocMode::Deterministic:
      out.push_back(candidates.empty() ? place(Placement::fresh()) : place(Placement::reuse_of(candidates.back())));
      break;
  }
  return out;
}

std::variant<HeapState, HeapFault> HeapState::free(BlockId id) const {
  auto it = blocks_.find(id);
  if (it == blocks_.end()) return HeapFault{FaultKind::InvalidFree, id};
  if (it->second.status == BlockStatus::Freed) return HeapFault{FaultKind::DoubleFree, id};
  HeapState next = *this;
  next.blocks_[id].status = BlockStatus::Freed;
  next.free_order_.push_back(id);
  return next;
}

std::optional<HeapFault> HeapState::access(BlockId id, const std::string& expected_record) const {
  const HeapBlock* b = block(id);
  if (!b) return HeapFault{FaultKind::InvalidAccess, id};
  if (b->status == BlockStatus::Allocated) {
    if (b->record == expected_record) return std::nullopt;
    return HeapFault{FaultKind::TypeConfusedUseAfterFree, id};
  }
  // Follow the reuse chain to whatever now lives in this memory.
  BlockId cur = b->occupant;
  while (cur >= 0) {
    const HeapBlock& occ = blocks_.at(cur);
    if (occ.status == BlockStatus::Allocated)
      return HeapFault{occ.record != expected_record ? FaultKind::TypeConfusedUseAfterFree : FaultKind::UseAfterFree, id};
    cur = occ.occupant;
  }
  return HeapFault{FaultKind::UseAfterFree, id};
}

HeapState HeapState::with_external(const std::string& record, int size, BlockId* id_out) const {
  HeapState next = *this;
  BlockId id = next.next_id_++;
  next.blocks_[id] = HeapBlock{record, BlockStatus::Allocated, size, Placement::fresh(), -1};
  next.external_.push_back(id);
  if (id_out) *id_out = id;
  return next;
}

std::vector<std::pair<HeapState, BlockId>> heap_alloc(const HeapState& h, const std::string& record, int size,
                                                      AllocMode mode) {
  return h.alloc(record, size, mode);
}

std::variant<HeapState, HeapFault> heap_free(const HeapState& h, BlockId id) { return h.free(id); }

std::optional<HeapFault> heap_access(const HeapState& h, BlockId id, const std::string& expected_record) {
  return h.access(id, expected_record);
}

}  // namespace shardsym::sym
