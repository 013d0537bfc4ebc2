#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "shardsym/verify/verify.hpp"

namespace shardsym {

inline constexpr const char* kToolName = "shardsym";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

struct PhaseTiming {
  double divide_ms = 0;
  double conquer_ms = 0;
  double verify_ms = 0;
  double total_ms = 0;
};

struct Report {
  std::string program;
  std::string mode;   // "divide-conquer" or "baseline"
  AnalysisConfig config;
  std::vector<std::string> models;
  std::vector<Finding> findings;
  std::vector<std::string> warnings;
  long long summary_entries = 0;
  long long candidates = 0;
  long long paths = 0;           // feature paths, or explored baseline paths
  std::string limit_hit = "none";   // none | timeout | paths
  PhaseTiming timing;

  int count(FindingStatus s) const;
  bool has_verified() const { return count(FindingStatus::Verified) > 0; }
};

/// Divide, conquer and verify one program.
Report analyze(const TypedProgram& p, const std::string& label, const AnalysisConfig& cfg,
               const std::vector<WeaknessModel>& models, ProgramSummaries* summaries_out = nullptr);

/// Whole-program forward symbolic execution with calls inlined; every fault
/// path is reported with a solved tape and replayed. Budget exhaustion is
/// recorded in `limit_hit`, findings up to that point are kept.
Report baseline_analyze(const TypedProgram& p, const std::string& label, const AnalysisConfig& cfg);

/// The report as JSON; `timing` is the only field that varies between runs.
nlohmann::ordered_json report_json(const Report& r, bool with_timing = true);
nlohmann::ordered_json run_outcome_json(const RunOutcome& o);
nlohmann::ordered_json config_json(const AnalysisConfig& cfg);

/// Sidecar expectation of a corpus program.
struct Expectation {
  struct Item {
    std::string cwe;
    int line = 0;
  };
  std::vector<Item> expected;   // weaknesses that must be Verified
  int leaks = 0;                // number of leak warnings
};
Expectation load_expectation(const std::string& path);
/// Empty when the report meets the expectation; otherwise one line per mismatch.
std::vector<std::string> check_expectation(const Report& r, const Expectation& e);

struct BenchRow {
  std::string program;
  std::string method;
  bool found = false;   // every expected weakness verified
  double time_ms = 0;
  long long peak_paths = 0;
  std::string limit_hit;
  int verified = 0;
  int leak_warnings = 0;
  std::vector<std::string> mismatches;
};

struct BenchOptions {
  bool divide = true;
  bool baseline = true;
  /// Baseline budget overrides; unset keeps the analysis config.
  std::optional<double> baseline_timeout_s;
};

/// Runs the selected methods over every *.minc file of `dir` (sorted).
/// Expectations are checked for divide-conquer always and for the baseline
/// when it finished within its budgets.
std::vector<BenchRow> bench(const std::string& dir, const AnalysisConfig& cfg, const std::vector<WeaknessModel>& models,
                            const BenchOptions& opt, const std::function<void(const BenchRow&)>& progress = {});
std::string bench_csv(const std::vector<BenchRow>& rows);

/// Runs `fn` on a thread with a large stack; the executors recurse deeply.
void run_with_large_stack(const std::function<void()>& fn);

}  // namespace shardsym
