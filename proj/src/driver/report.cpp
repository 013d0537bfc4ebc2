#include <fstream>
#include <stdexcept>

#include "shardsym/driver/driver.hpp"

namespace shardsym {

namespace {

using Json = nlohmann::ordered_json;

Json loc_json(const SourceLoc& l) { return {{"line", l.line}, {"col", l.col}}; }

Json tape_json(const InputTape& t) { return {{"ints", t.ints}, {"strs", t.strs}}; }

Json value_json(const Value& v) {
  if (auto* i = std::get_if<std::int32_t>(&v)) return *i;
  if (auto* s = std::get_if<ConcreteString>(&v)) return s->text();
  if (auto* r = std::get_if<RefValue>(&v)) return r->block < 0 ? Json(nullptr) : Json{{"block", r->block}};
  return std::get<std::vector<std::int32_t>>(v);
}

Json trace_json(const TraceEvent& e) {
  Json j = {{"kind", to_string(e.kind)}, {"line", e.loc.line}, {"col", e.loc.col}, {"call_path", to_string(e.chain)}};
  switch (e.kind) {
    case EventKind::Malloc:
      j["block"] = e.block;
      j["record"] = e.record;
      j["size"] = e.size;
      j["placement"] = sym::to_string(e.placement);
      break;
    case EventKind::Free: j["block"] = e.block; break;
    case EventKind::Access:
      j["block"] = e.block;
      j["record"] = e.record;
      break;
    case EventKind::DbQuery: j["query"] = e.query; break;
  }
  return j;
}

Json finding_json(const Finding& f, size_t index) {
  Json j;
  j["id"] = "F" + std::to_string(index + 1);
  j["cwe"] = f.cwe;
  j["model"] = f.model;
  j["severity"] = f.severity;
  j["status"] = to_string(f.status);
  j["reason"] = f.reason.empty() ? Json(nullptr) : Json(f.reason);
  j["refuted_step"] = f.status == FindingStatus::Refuted ? Json(f.refuted_step) : Json(nullptr);
  j["location"] = loc_json(f.loc);
  j["call_path"] = to_string(f.chain);
  j["expected_fault"] = f.fault ? Json(to_string(*f.fault)) : Json(nullptr);
  j["witness"] = f.status == FindingStatus::Verified ? tape_json(f.witness) : Json(nullptr);
  Json evs = Json::array();
  for (const auto& e : f.events) {
    Json ej = {{"kind", to_string(e.kind)}, {"line", e.loc.line}, {"col", e.loc.col}, {"call_path", to_string(e.chain)}};
    if (!e.record.empty()) ej["record"] = e.record;
    if (e.kind == PathEventKind::Malloc) ej["placement"] = sym::to_string(e.placement);
    evs.push_back(std::move(ej));
  }
  j["events"] = std::move(evs);
  j["candidates"] = f.candidates;
  return j;
}

}  // namespace

Json config_json(const AnalysisConfig& cfg) {
  return {{"loop_bound", cfg.loop_bound},
          {"call_depth", cfg.call_depth},
          {"paths_max", cfg.paths_max},
          {"trace_max", cfg.trace_max},
          {"solver_domain", std::to_string(cfg.solver.domain.lo) + ".." + std::to_string(cfg.solver.domain.hi)},
          {"solver_vars_max", cfg.solver.vars_max},
          {"timeout_s", cfg.timeout_s},
          {"prune_infeasible", cfg.prune_infeasible},
          {"baseline_paths_max", cfg.baseline_paths_max}};
}

Json report_json(const Report& r, bool with_timing) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  j["program"] = r.program;
  j["mode"] = r.mode;
  j["notes"] = {
      "In-range memory checks are source-level: out-of-bounds array index, use of a freed local block, and "
      "invalid or repeated free of a local block.",
      "Injection witnesses place the first keyword (SELECT) in the first unsanitized input; keywords are not solved "
      "for individually."};
  Json cfg = config_json(r.config);
  cfg["models"] = r.models;
  j["config"] = std::move(cfg);
  Json fs = Json::array();
  for (size_t i = 0; i < r.findings.size(); ++i) fs.push_back(finding_json(r.findings[i], i));
  j["findings"] = std::move(fs);
  j["warnings"] = r.warnings;
  j["totals"] = {{"findings", r.findings.size()},
                 {"verified", r.count(FindingStatus::Verified)},
                 {"refuted", r.count(FindingStatus::Refuted)},
                 {"unknown", r.count(FindingStatus::Unknown)},
                 {"leak_warnings", r.count(FindingStatus::Warning)},
                 {"candidates", r.candidates},
                 {"summary_entries", r.summary_entries},
                 {"paths", r.paths},
                 {"limit_hit", r.limit_hit}};
  if (with_timing) {
    Json per = Json::array();
    for (size_t i = 0; i < r.findings.size(); ++i)
      per.push_back({{"id", "F" + std::to_string(i + 1)}, {"verify_ms", r.findings[i].verify_ms}});
    j["timing"] = {{"divide_ms", r.timing.divide_ms},
                   {"conquer_ms", r.timing.conquer_ms},
                   {"verify_ms", r.timing.verify_ms},
                   {"total_ms", r.timing.total_ms},
                   {"findings", std::move(per)}};
  }
  return j;
}

Json run_outcome_json(const RunOutcome& o) {
  Json j;
  switch (o.status) {
    case RunOutcome::Status::Completed: j["status"] = "Completed"; break;
    case RunOutcome::Status::Fault: j["status"] = "Fault"; break;
    case RunOutcome::Status::FuelExhausted: j["status"] = "FuelExhausted"; break;
  }
  if (o.faulted()) {
    Json f = {{"kind", to_string(o.fault)}, {"line", o.fault_loc.line}, {"col", o.fault_loc.col},
              {"call_path", to_string(o.fault_chain)}};
    if (!o.keyword.empty()) f["keyword"] = o.keyword;
    j["fault"] = std::move(f);
  } else {
    j["fault"] = nullptr;
  }
  j["result"] = o.result ? value_json(*o.result) : Json(nullptr);
  j["steps"] = o.steps;
  Json tr = Json::array();
  for (const auto& e : o.trace) tr.push_back(trace_json(e));
  j["trace"] = std::move(tr);
  Json lk = Json::array();
  for (const auto& e : o.leaks) lk.push_back(trace_json(e));
  j["leaks"] = std::move(lk);
  return j;
}

Expectation load_expectation(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  Expectation e;
  for (const auto& it : j.at("expected")) e.expected.push_back({it.at("cwe").get<std::string>(), it.at("line").get<int>()});
  e.leaks = j.value("leaks", 0);
  return e;
}

std::vector<std::string> check_expectation(const Report& r, const Expectation& e) {
  std::vector<std::string> out;
  auto verified_at = [&](const std::string& cwe, int line) {
    return std::any_of(r.findings.begin(), r.findings.end(), [&](const Finding& f) {
      return f.status == FindingStatus::Verified && f.cwe == cwe && f.loc.line == line;
    });
  };
  for (const auto& x : e.expected)
    if (!verified_at(x.cwe, x.line)) out.push_back("missing verified " + x.cwe + " at line " + std::to_string(x.line));
  for (const auto& f : r.findings) {
    if (f.status != FindingStatus::Verified) continue;
    bool listed = std::any_of(e.expected.begin(), e.expected.end(),
                              [&](const Expectation::Item& x) { return x.cwe == f.cwe && x.line == f.loc.line; });
    if (!listed) out.push_back("unexpected verified " + f.cwe + " at line " + std::to_string(f.loc.line));
  }
  int leaks = r.count(FindingStatus::Warning);
  if (leaks != e.leaks)
    out.push_back("expected " + std::to_string(e.leaks) + " leak warning(s), got " + std::to_string(leaks));
  return out;
}

}  // namespace shardsym
