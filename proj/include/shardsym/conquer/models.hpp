#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "shardsym/conquer/paths.hpp"

namespace shardsym {

struct ModelTransition {
  std::string from;
  std::string on;                   // malloc | free | access | dbquery | fault | end
  std::vector<std::string> where;   // predicates that must all hold
  std::string to;
};

/// A weakness model: a state machine over path events, instantiated once per
/// heap block (bind = "block") or once per path (bind = "none").
struct WeaknessModel {
  std::string name;
  std::string cwe;
  std::string severity = "vulnerability";   // or "warning"
  std::optional<FaultKind> fault;          // the concrete fault a witness must raise
  std::string bind = "block";
  std::string init = "start";
  std::set<std::string> accept;
  std::string report_at = "last";          // which matched event locates the finding
  std::vector<ModelTransition> transitions;
};

/// Parses and validates one model; throws std::runtime_error on malformed input.
WeaknessModel parse_model(const nlohmann::json& j);
/// Loads every *.json model of a directory, sorted by file name.
std::vector<WeaknessModel> load_models(const std::string& dir);

struct ModelMatch {
  std::vector<size_t> events;   // indices into the path, in match order
  size_t key = 0;               // the event the finding is reported at
};

/// Runs the model over a path. Each binding's machine returns to the initial
/// state after accepting, so one path can yield several matches.
std::vector<ModelMatch> match_model(const WeaknessModel& m, const std::vector<PathEvent>& events);

}  // namespace shardsym
