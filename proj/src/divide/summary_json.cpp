#include "shardsym/divide/summary_json.hpp"

namespace shardsym {

using nlohmann::ordered_json;

ordered_json to_json(const SourceLoc& loc) { return {{"line", loc.line}, {"col", loc.col}}; }

ordered_json to_json(const sym::PathCondition& pc) {
  ordered_json out = ordered_json::array();
  for (const auto& l : pc) out.push_back(sym::to_string(l.as_constraint()));
  return out;
}

ordered_json to_json(const Feature& f) {
  ordered_json j;
  j["kind"] = to_string(f.kind);
  j["loc"] = to_json(f.loc);
  j["guard_len"] = f.guard_len;
  switch (f.kind) {
    case FeatureKind::Malloc:
      j["origin"] = f.origin.str();
      j["record"] = f.record;
      j["size"] = f.size;
      break;
    case FeatureKind::Free: j["origin"] = f.origin.str(); break;
    case FeatureKind::Access:
      j["origin"] = f.origin.str();
      j["record"] = f.record;
      break;
    case FeatureKind::Store:
    case FeatureKind::Load:
      j["origin"] = f.origin.str();
      j["field"] = f.field;
      j["value"] = f.value ? to_string(*f.value) : "";
      break;
    case FeatureKind::DbQuery: j["query"] = f.query.to_string(); break;
    case FeatureKind::CallSite: {
      j["callee"] = f.callee;
      j["summary"] = f.summary_key;
      j["entry"] = f.entry;
      j["site"] = f.site;
      j["tag"] = f.tag;
      ordered_json args = ordered_json::array();
      for (const auto& a : f.args) args.push_back(to_string(a));
      j["args"] = args;
      j["int_offset"] = f.int_offset;
      j["str_offset"] = f.str_offset;
      break;
    }
  }
  return j;
}

ordered_json to_json(const SummaryEntry& e) {
  ordered_json j;
  j["guard"] = to_json(e.guard);
  j["result"] = e.result ? ordered_json(to_string(*e.result)) : ordered_json(nullptr);
  ordered_json fs = ordered_json::array();
  for (const auto& f : e.features) fs.push_back(to_json(f));
  j["features"] = fs;
  if (e.fault) {
    j["fault"] = {{"kind", to_string(e.fault->kind)},
                  {"loc", to_json(e.fault->loc)},
                  {"guard_len", e.fault->guard_len},
                  {"detail", e.fault->detail}};
  } else {
    j["fault"] = nullptr;
  }
  j["callee_fault"] = e.callee_fault;
  j["int_inputs"] = e.int_inputs;
  j["str_inputs"] = e.str_inputs;
  return j;
}

ordered_json to_json(const FunctionSummary& s) {
  ordered_json j;
  j["key"] = s.key;
  j["function"] = s.function;
  j["level"] = s.level;
  j["truncated"] = s.truncated;
  j["warnings"] = s.warnings;
  ordered_json es = ordered_json::array();
  for (const auto& e : s.entries) es.push_back(to_json(e));
  j["entries"] = es;
  return j;
}

ordered_json to_json(const ProgramSummaries& s) {
  ordered_json j;
  j["schema_version"] = 1;
  ordered_json keys = ordered_json::object();
  for (const auto& [fn, key] : s.final_key) keys[fn] = key;
  j["final_keys"] = keys;
  ordered_json fs = ordered_json::array();
  for (const auto& [key, sum] : s.table) fs.push_back(to_json(sum));
  j["summaries"] = fs;
  j["warnings"] = s.warnings;
  return j;
}

}  // namespace shardsym
