#pragma once

#include <json.hpp>

#include "shardsym/divide/summary.hpp"

namespace shardsym {

nlohmann::ordered_json to_json(const SourceLoc& loc);
nlohmann::ordered_json to_json(const sym::PathCondition& pc);
nlohmann::ordered_json to_json(const Feature& f);
nlohmann::ordered_json to_json(const SummaryEntry& e);
nlohmann::ordered_json to_json(const FunctionSummary& s);
/// Every summary, keyed in table order; the layout is documented in docs/summaries.md.
nlohmann::ordered_json to_json(const ProgramSummaries& s);

}  // namespace shardsym
