#include "shardsym/conquer/models.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace shardsym {

namespace {

const std::set<std::string>& event_names() {
  static const std::set<std::string> n = {"malloc", "free", "access", "dbquery", "fault", "end"};
  return n;
}

bool known_predicate(const std::string& p) {
  static const std::set<std::string> plain = {"subject", "reuses_subject", "record_differs", "expects_subject_record",
                                              "unsanitized_input", "heap_fault"};
  if (plain.count(p)) return true;
  return p.rfind("fault=", 0) == 0 && fault_kind_from_string(p.substr(6)).has_value();
}

struct Instance {
  sym::BlockId block = -1;
  std::string record;
  std::string state;
  std::vector<size_t> matched;
};

bool holds(const std::string& p, const Instance& in, const PathEvent& e) {
  if (p == "subject") return e.block >= 0 && e.block == in.block;
  if (p == "reuses_subject") return e.kind == PathEventKind::Malloc && e.placement.reuse && e.placement.target == in.block;
  if (p == "record_differs") return e.record != in.record;
  if (p == "expects_subject_record") return e.record == in.record;
  if (p == "unsanitized_input") return e.kind == PathEventKind::DbQuery && e.query.has_unsanitized_input();
  if (p == "heap_fault") return e.fault.has_value();
  if (p.rfind("fault=", 0) == 0) return e.fault && *e.fault == *fault_kind_from_string(p.substr(6));
  return false;
}

}  // namespace

WeaknessModel parse_model(const nlohmann::json& j) {
  auto fail = [&](const std::string& why) {
    throw std::runtime_error("model " + j.value("name", std::string("?")) + ": " + why);
  };
  WeaknessModel m;
  m.name = j.at("name").get<std::string>();
  m.cwe = j.at("cwe").get<std::string>();
  m.severity = j.value("severity", m.severity);
  if (m.severity != "vulnerability" && m.severity != "warning") fail("severity must be vulnerability or warning");
  if (j.contains("fault") && !j.at("fault").is_null()) {
    m.fault = fault_kind_from_string(j.at("fault").get<std::string>());
    if (!m.fault) fail("unknown fault kind");
  }
  m.bind = j.value("bind", m.bind);
  if (m.bind != "block" && m.bind != "none") fail("bind must be block or none");
  m.init = j.value("init", m.init);
  for (const auto& a : j.at("accept")) m.accept.insert(a.get<std::string>());
  if (m.accept.empty()) fail("no accept state");
  m.report_at = j.value("report_at", m.report_at);
  if (m.report_at != "first" && m.report_at != "last") fail("report_at must be first or last");
  for (const auto& t : j.at("transitions")) {
    ModelTransition tr;
    tr.from = t.at("from").get<std::string>();
    tr.on = t.at("on").get<std::string>();
    tr.to = t.at("to").get<std::string>();
    if (t.contains("where"))
      for (const auto& w : t.at("where")) tr.where.push_back(w.get<std::string>());
    if (!event_names().count(tr.on)) fail("unknown event " + tr.on);
    for (const auto& w : tr.where)
      if (!known_predicate(w)) fail("unknown predicate " + w);
    if (m.bind == "none") {
      for (const auto& w : tr.where)
        if (w == "subject" || w == "reuses_subject" || w == "record_differs" || w == "expects_subject_record")
          fail("predicate " + w + " needs bind = block");
    }
    m.transitions.push_back(std::move(tr));
  }
  if (m.transitions.empty()) fail("no transitions");
  return m;
}

std::vector<WeaknessModel> load_models(const std::string& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<WeaknessModel> out;
  for (const auto& f : files) {
    std::ifstream in(f);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(f.string() + ": " + e.what());
    }
    out.push_back(parse_model(j));
  }
  return out;
}

std::vector<ModelMatch> match_model(const WeaknessModel& m, const std::vector<PathEvent>& events) {
  std::vector<Instance> live;
  if (m.bind == "none") live.push_back({-1, {}, m.init, {}});
  std::vector<ModelMatch> out;
  for (size_t i = 0; i < events.size(); ++i) {
    const PathEvent& e = events[i];
    if (m.bind == "block" && e.kind == PathEventKind::Malloc && e.block >= 0) {
      bool seen = std::any_of(live.begin(), live.end(), [&](const Instance& in) { return in.block == e.block; });
      if (!seen) live.push_back({e.block, e.record, m.init, {}});
    }
    std::string on = to_string(e.kind);
    for (auto& in : live) {
      for (const auto& t : m.transitions) {
        if (t.from != in.state || t.on != on) continue;
        if (!std::all_of(t.where.begin(), t.where.end(), [&](const std::string& p) { return holds(p, in, e); })) continue;
        in.state = t.to;
        if (t.to == m.init) {
          in.matched.clear();   // reset: the tracked binding starts over
        } else {
          in.matched.push_back(i);
        }
        if (m.accept.count(t.to)) {
          ModelMatch mm;
          mm.events = in.matched;
          mm.key = m.report_at == "first" ? in.matched.front() : in.matched.back();
          out.push_back(std::move(mm));
          in.state = m.init;
          in.matched.clear();
        }
        break;
      }
    }
  }
  return out;
}

}  // namespace shardsym
