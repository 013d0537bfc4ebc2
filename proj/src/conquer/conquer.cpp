#include "shardsym/conquer/conquer.hpp"

#include <set>

namespace shardsym {

namespace {

std::string signature(const WeaknessModel& m, const FeaturePath& p, const ModelMatch& mm) {
  std::string s = m.name + "|" + std::to_string(p.main_entry);
  for (size_t i : mm.events) {
    const PathEvent& e = p.events[i];
    s += "|" + std::string(to_string(e.kind)) + "@" + to_string(e.loc) + "#" + to_string(e.chain) + ":" + std::to_string(e.block) +
         "/" + sym::to_string(e.placement);
  }
  // Placements up to the key event decide whether the concrete heap can follow.
  s += "|heap";
  for (size_t i = 0; i <= mm.key; ++i)
    if (p.events[i].kind == PathEventKind::Malloc) s += ":" + sym::to_string(p.events[i].placement);
  return s;
}

}  // namespace

std::optional<int> sqli_check(const PathEvent& query) {
  if (query.kind != PathEventKind::DbQuery) return std::nullopt;
  return query.query.first_unsanitized_input();
}

ConquerResult conquer(const TypedProgram& p, const ProgramSummaries& s, const std::vector<WeaknessModel>& models,
                      const AnalysisConfig& cfg) {
  ConquerResult out;
  std::set<std::string> seen;
  out.stats = enumerate_feature_paths(p, s, cfg, [&](std::shared_ptr<const FeaturePath> path) {
    for (const auto& m : models) {
      for (auto& mm : match_model(m, path->events)) {
        if (!seen.insert(signature(m, *path, mm)).second) continue;
        Candidate c;
        c.model = &m;
        c.path = path;
        c.events = std::move(mm.events);
        c.key = mm.key;
        out.candidates.push_back(std::move(c));
      }
    }
    return true;
  });
  return out;
}

}  // namespace shardsym
