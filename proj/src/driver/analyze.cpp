#include <pthread.h>

#include <chrono>
#include <exception>
#include <map>
#include <stdexcept>

#include "shardsym/divide/executor.hpp"
#include "shardsym/driver/driver.hpp"

namespace shardsym {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t) { return std::chrono::duration<double, std::milli>(Clock::now() - t).count(); }

struct Weakness {
  const char* model;
  const char* cwe;
};

// The weakness class a concrete fault belongs to, named as in the shipped models.
Weakness weakness_of(FaultKind k) {
  switch (k) {
    case FaultKind::UseAfterFree:
    case FaultKind::TypeConfusedUseAfterFree: return {"use-after-free", "CWE-416"};
    case FaultKind::DoubleFree: return {"double-free", "CWE-415"};
    case FaultKind::OutOfBoundsAccess: return {"out-of-bounds", "OOB"};
    case FaultKind::InvalidFree: return {"invalid-free", "CWE-590"};
    case FaultKind::InvalidAccess: return {"null-access", "CWE-476"};
    case FaultKind::UnsanitizedQuery: return {"sql-injection", "CWE-89"};
  }
  return {"?", "?"};
}

std::string finding_key(const std::string& cwe, const SourceLoc& loc, const CallChain& chain) {
  return cwe + "|" + to_string(loc) + "|" + to_string(chain);
}

void sort_findings(std::vector<Finding>& fs) {
  std::stable_sort(fs.begin(), fs.end(), [](const Finding& a, const Finding& b) {
    if (a.loc.line != b.loc.line) return a.loc.line < b.loc.line;
    if (a.loc.col != b.loc.col) return a.loc.col < b.loc.col;
    std::string ca = to_string(a.chain), cb = to_string(b.chain);
    if (ca != cb) return ca < cb;
    return a.cwe < b.cwe;
  });
}

}  // namespace

int Report::count(FindingStatus s) const {
  return static_cast<int>(std::count_if(findings.begin(), findings.end(), [&](const Finding& f) { return f.status == s; }));
}

Report analyze(const TypedProgram& p, const std::string& label, const AnalysisConfig& cfg,
               const std::vector<WeaknessModel>& models, ProgramSummaries* summaries_out) {
  Report r;
  r.program = label;
  r.mode = "divide-conquer";
  r.config = cfg;
  for (const auto& m : models) r.models.push_back(m.name);
  auto t0 = Clock::now();
  ProgramSummaries s;
  try {
    s = summarize_program(p, cfg);
  } catch (const BudgetExceeded& b) {
    r.limit_hit = b.what;
    r.warnings.push_back("Timeout: summarization exceeded " + std::to_string(cfg.timeout_s) + " s; no findings reported");
    r.timing.divide_ms = r.timing.total_ms = ms_since(t0);
    return r;
  }
  r.timing.divide_ms = ms_since(t0);
  for (const auto& [key, fs] : s.table) r.summary_entries += static_cast<long long>(fs.entries.size());

  auto t1 = Clock::now();
  ConquerResult c = conquer(p, s, models, cfg);
  r.timing.conquer_ms = ms_since(t1);
  r.candidates = static_cast<long long>(c.candidates.size());
  r.paths = c.stats.paths;

  auto t2 = Clock::now();
  r.findings = verify_all(p, s, c.candidates, cfg);
  r.timing.verify_ms = ms_since(t2);
  r.timing.total_ms = ms_since(t0);

  r.warnings = s.warnings;
  for (const auto& w : c.stats.warnings) r.warnings.push_back(w);
  for (const auto& f : r.findings)
    if (f.status == FindingStatus::Unknown)
      r.warnings.push_back("Unknown: " + f.cwe + " at " + to_string(f.loc) + " in " + to_string(f.chain) + ": " + f.reason);
  if (summaries_out) *summaries_out = std::move(s);
  return r;
}

Report baseline_analyze(const TypedProgram& p, const std::string& label, const AnalysisConfig& cfg) {
  Report r;
  r.program = label;
  r.mode = "baseline";
  r.config = cfg;
  auto t0 = Clock::now();
  Executor ex(p, cfg, ExecMode::Inline);
  ex.set_path_budget(cfg.baseline_paths_max);
  ex.set_deadline(t0 + std::chrono::milliseconds(static_cast<long long>(cfg.timeout_s * 1000)));
  const FunctionDecl& main = p.function(p.program().entry);
  std::map<std::string, Finding> found;

  auto on_end = [&](ExecState&& s, std::optional<SymValue>) {
    if (!s.fault) {
      for (sym::BlockId id : s.heap.allocated()) {
        auto site = s.alloc_site.find(id);
        if (site == s.alloc_site.end()) continue;
        std::string key = finding_key("CWE-401", site->second.first, site->second.second);
        if (found.count(key)) continue;
        Finding f;
        f.model = "memory-leak";
        f.cwe = "CWE-401";
        f.severity = "warning";
        f.status = FindingStatus::Warning;
        f.loc = site->second.first;
        f.chain = site->second.second;
        found.emplace(key, std::move(f));
      }
      return;
    }
    const RangeFinding& rf = *s.fault;
    Weakness w = weakness_of(rf.kind);
    std::string key = finding_key(w.cwe, rf.loc, s.chain);
    auto it = found.find(key);
    if (it != found.end()) {
      ++it->second.candidates;
      if (it->second.status == FindingStatus::Verified) return;
    }
    auto tv = Clock::now();
    Finding f;
    f.model = w.model;
    f.cwe = w.cwe;
    f.severity = "vulnerability";
    f.fault = rf.kind == FaultKind::TypeConfusedUseAfterFree ? FaultKind::UseAfterFree : rf.kind;
    f.loc = rf.loc;
    f.chain = s.chain;
    f.candidates = it == found.end() ? 1 : it->second.candidates;
    sym::PathCondition pc(s.pc.begin(), s.pc.begin() + static_cast<long>(std::min(rf.guard_len, s.pc.size())));
    sym::SolverVerdict v = sym::check_sat(pc, cfg.solver);
    if (v.sat()) {
      std::optional<int> slot;
      if (rf.input_index >= 0) slot = rf.input_index;
      f.witness = synthesize_tape(v.model, s.ints, s.strs, slot);
      if (replay_witness(p, f.witness, {*f.fault, f.loc, f.chain})) {
        f.status = FindingStatus::Verified;
      } else {
        f.status = FindingStatus::Unknown;
        f.reason = "ReplayFailed: the solved tape does not reproduce the fault";
      }
    } else {
      f.status = v.unsat() ? FindingStatus::Refuted : FindingStatus::Unknown;
      f.reason = v.unsat() ? "unsatisfiable path condition" : "SolverUnknown: " + v.reason;
    }
    f.verify_ms = std::chrono::duration<double, std::milli>(Clock::now() - tv).count();
    found[key] = std::move(f);
  };

  try {
    ex.run(main, ex.initial_state(main), on_end);
  } catch (const BudgetExceeded& b) {
    r.limit_hit = b.what;
    if (b.what == "timeout")
      r.warnings.push_back("Timeout: exploration stopped after " + std::to_string(cfg.timeout_s) + " s");
    else
      r.warnings.push_back("PathBudgetExceeded: more than " + std::to_string(cfg.baseline_paths_max) + " paths");
  }
  r.paths = ex.paths();
  for (const auto& w : ex.warnings()) r.warnings.push_back(w);
  for (auto& [k, f] : found) {
    r.timing.verify_ms += f.verify_ms;
    r.findings.push_back(std::move(f));
  }
  sort_findings(r.findings);
  r.candidates = static_cast<long long>(r.findings.size());
  r.timing.total_ms = ms_since(t0);
  r.timing.divide_ms = r.timing.total_ms - r.timing.verify_ms;
  return r;
}

void run_with_large_stack(const std::function<void()>& fn) {
  struct Job {
    const std::function<void()>* fn;
    std::exception_ptr error;
  } job{&fn, nullptr};
  pthread_attr_t attr;
  pthread_attr_init(&attr);
  pthread_attr_setstacksize(&attr, std::size_t{1} << 30);
  pthread_t th;
  auto body = [](void* arg) -> void* {
    auto* j = static_cast<Job*>(arg);
    try {
      (*j->fn)();
    } catch (...) {
      j->error = std::current_exception();
    }
    return nullptr;
  };
  if (pthread_create(&th, &attr, body, &job) != 0) {
    pthread_attr_destroy(&attr);
    fn();   // no thread available: run in place
    return;
  }
  pthread_join(th, nullptr);
  pthread_attr_destroy(&attr);
  if (job.error) std::rethrow_exception(job.error);
}

}  // namespace shardsym
