#pragma once

#include <memory>
#include <string>
#include <vector>

#include "shardsym/conquer/models.hpp"

namespace shardsym {

/// A model match on one feature path, awaiting verification.
struct Candidate {
  const WeaknessModel* model = nullptr;
  std::shared_ptr<const FeaturePath> path;
  std::vector<size_t> events;
  size_t key = 0;

  const PathEvent& key_event() const { return path->events[key]; }
};

struct ConquerResult {
  std::vector<Candidate> candidates;
  PathStats stats;
};

/// Enumerates feature paths and matches every model on each. Candidates that
/// repeat an earlier one (same model, events and placements) are dropped.
ConquerResult conquer(const TypedProgram& p, const ProgramSummaries& s, const std::vector<WeaknessModel>& models,
                      const AnalysisConfig& cfg);

/// The unsanitized-input check of the injection model as a standalone query:
/// the index of the first unsanitized input segment, if any.
std::optional<int> sqli_check(const PathEvent& query);

}  // namespace shardsym
