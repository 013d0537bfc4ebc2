#include "shardsym/verify/verify.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <set>

namespace shardsym {

const char* to_string(FindingStatus s) {
  switch (s) {
    case FindingStatus::Verified: return "Verified";
    case FindingStatus::Refuted: return "Refuted";
    case FindingStatus::Unknown: return "Unknown";
    case FindingStatus::Warning: return "Warning";
  }
  return "?";
}

namespace {

const SummaryEntry& entry_of(const ProgramSummaries& s, const FrameRef& f) {
  return s.table.at(f.summary_key).entries.at(static_cast<size_t>(f.entry));
}

sym::PathCondition prefix(const sym::PathCondition& pc, size_t n) {
  return {pc.begin(), pc.begin() + static_cast<long>(std::min(n, pc.size()))};
}

int rank(FindingStatus s) {
  switch (s) {
    case FindingStatus::Verified: return 3;
    case FindingStatus::Unknown: return 2;
    case FindingStatus::Refuted: return 1;
    case FindingStatus::Warning: return 0;
  }
  return 0;
}

bool comparable(PathEventKind k) { return k != PathEventKind::Fault && k != PathEventKind::End; }

bool same_kind(PathEventKind a, EventKind b) {
  switch (a) {
    case PathEventKind::Malloc: return b == EventKind::Malloc;
    case PathEventKind::Free: return b == EventKind::Free;
    case PathEventKind::Access: return b == EventKind::Access;
    case PathEventKind::DbQuery: return b == EventKind::DbQuery;
    default: return false;
  }
}

// Replays the tape and checks that the concrete run takes the candidate's
// path up to its key event, with the same heap placements. Returns the
// mismatch reason, or nothing when consistent.
std::optional<std::string> placement_check(const TypedProgram& p, const Candidate& c, const InputTape& tape) {
  RunOutcome o = run(p, tape);
  std::map<sym::BlockId, sym::BlockId> to_concrete;
  size_t j = 0;
  for (size_t i = 0; i <= c.key; ++i) {
    const PathEvent& a = c.path->events[i];
    if (!comparable(a.kind)) continue;
    if (j >= o.trace.size())
      return "PathMismatch: the concrete run stops before " + std::string(to_string(a.kind)) + " at " + to_string(a.loc);
    const TraceEvent& t = o.trace[j++];
    if (!same_kind(a.kind, t.kind) || !(a.loc == t.loc) || a.chain != t.chain)
      return "PathMismatch: expected " + std::string(to_string(a.kind)) + " at " + to_string(a.loc) + " in " +
             to_string(a.chain) + ", concrete run has " + to_string(t.kind) + " at " + to_string(t.loc) + " in " +
             to_string(t.chain);
    if (a.kind == PathEventKind::Malloc) {
      to_concrete[a.block] = t.block;
      sym::Placement want = a.placement;
      if (want.reuse) {
        auto it = to_concrete.find(want.target);
        want.target = it == to_concrete.end() ? -2 : it->second;
      }
      if (!(want == t.placement))
        return "PlacementMismatch: allocation at " + to_string(a.loc) + " is " + sym::to_string(a.placement) +
               " on the path but " + sym::to_string(t.placement) + " concretely";
    } else if (a.block >= 0 && t.block >= 0) {
      auto it = to_concrete.find(a.block);
      if (it != to_concrete.end() && it->second != t.block)
        return "PlacementMismatch: " + std::string(to_string(a.kind)) + " at " + to_string(a.loc) + " targets another block";
    }
  }
  return std::nullopt;
}

bool widened(const sym::PathCondition& pc) {
  std::set<sym::VarKey> vs;
  for (const auto& l : pc) sym::collect_vars(l.cond, vs);
  return std::any_of(vs.begin(), vs.end(), [](const sym::VarKey& v) { return v.kind != sym::VarKey::Kind::Input; });
}

}  // namespace

BackwardResult backward_verify(const TypedProgram& p, const ProgramSummaries& s, const Candidate& c,
                               const AnalysisConfig& cfg) {
  BackwardResult r;
  const PathEvent& ev = c.key_event();
  const auto& frames = ev.frames;
  size_t n = frames.size() - 1;
  sym::PathCondition pc = prefix(entry_of(s, frames[n]).guard, ev.guard_len);
  for (size_t step = 0;; ++step) {
    size_t k = n - step;
    if (k == 0) {
      for (const auto& [at, b] : c.path->bindings)
        if (at <= c.key) pc.push_back({b, true});
    }
    sym::SolverVerdict v = sym::check_sat(pc, cfg.solver);
    if (v.unsat()) {
      r.status = FindingStatus::Refuted;
      r.step = static_cast<int>(step);
      r.reason = "unsatisfiable at step " + std::to_string(step) + " (" + frames[k].function + ")";
      return r;
    }
    if (v.unknown()) {
      r.status = FindingStatus::Unknown;
      r.reason = "SolverUnknown: " + v.reason;
      return r;
    }
    if (k == 0) {
      r.status = FindingStatus::Verified;
      r.model = std::move(v.model);
      r.constraint = std::move(pc);
      return r;
    }
    // Into the caller: map through the call site, then add the caller's path up to the call.
    const FrameRef& callee = frames[k];
    Instantiation in = call_instantiation(callee.call, p.function(callee.function));
    sym::PathCondition outer = prefix(entry_of(s, frames[k - 1]).guard, callee.call.guard_len);
    for (const auto& l : instantiate(pc, in)) outer.push_back(l);
    pc = std::move(outer);
  }
}

InputTape synthesize_tape(const sym::Assignment& model, int ints, int strs, std::optional<int> sqli_slot) {
  InputTape t;
  for (int k = 0; k < ints; ++k) {
    auto it = model.find(sym::VarKey::input(k));
    t.ints.push_back(it == model.end() ? 0 : it->second);
  }
  t.strs.assign(static_cast<size_t>(std::max(0, strs)), "");
  if (sqli_slot) {
    if (static_cast<int>(t.strs.size()) <= *sqli_slot) t.strs.resize(static_cast<size_t>(*sqli_slot) + 1);
    t.strs[static_cast<size_t>(*sqli_slot)] = sql_keywords().front();
  }
  return t;
}

Finding verify_candidate(const TypedProgram& p, const ProgramSummaries& s, const Candidate& c, const AnalysisConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  const PathEvent& key = c.key_event();
  Finding f;
  f.model = c.model->name;
  f.cwe = c.model->cwe;
  f.severity = c.model->severity;
  f.fault = c.model->fault;
  f.loc = key.loc;
  f.chain = key.chain;
  for (size_t i : c.events) {
    const PathEvent& e = c.path->events[i];
    f.events.push_back({e.kind, e.loc, e.chain, e.record, e.placement});
  }
  if (c.model->severity == "warning") {
    f.status = FindingStatus::Warning;
    return f;
  }
  BackwardResult br = backward_verify(p, s, c, cfg);
  f.status = br.status;
  f.reason = br.reason;
  f.refuted_step = br.step;
  if (br.status == FindingStatus::Verified) {
    const SummaryEntry& main_entry = entry_of(s, c.path->events[c.key].frames[0]);
    f.witness = synthesize_tape(br.model, main_entry.int_inputs, main_entry.str_inputs, sqli_check(key));
    if (auto mismatch = placement_check(p, c, f.witness)) {
      f.status = FindingStatus::Unknown;
      f.reason = *mismatch;
    } else if (f.fault && !replay_witness(p, f.witness, {*f.fault, f.loc, f.chain})) {
      // Values read through a cut-off call or an unknown heap cell are free
      // in the constraint, so a model can exist that no real run produces.
      f.status = FindingStatus::Unknown;
      f.reason = "ReplayFailed: the witness does not raise " + std::string(to_string(*f.fault)) + " at " +
                 to_string(f.loc) + (widened(br.constraint) ? " (the path reads unconstrained values)" : "");
    }
  }
  f.verify_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return f;
}

std::vector<Finding> verify_all(const TypedProgram& p, const ProgramSummaries& s, const std::vector<Candidate>& cands,
                                const AnalysisConfig& cfg) {
  std::map<std::string, Finding> groups;
  std::vector<std::string> order;
  for (const auto& c : cands) {
    const PathEvent& key = c.key_event();
    std::string id = c.model->cwe + "|" + to_string(key.loc) + "|" + to_string(key.chain);
    auto it = groups.find(id);
    if (it != groups.end() && (it->second.status == FindingStatus::Verified || it->second.status == FindingStatus::Warning)) {
      ++it->second.candidates;
      continue;
    }
    Finding f = verify_candidate(p, s, c, cfg);
    if (it == groups.end()) {
      groups.emplace(id, std::move(f));
      order.push_back(id);
      continue;
    }
    Finding& g = it->second;
    f.candidates = g.candidates + 1;
    f.verify_ms += g.verify_ms;
    if (rank(f.status) > rank(g.status)) {
      g = std::move(f);
    } else {
      g.candidates = f.candidates;
      g.verify_ms = f.verify_ms;
    }
  }
  std::vector<Finding> out;
  for (auto& id : order) out.push_back(std::move(groups.at(id)));
  std::stable_sort(out.begin(), out.end(), [](const Finding& a, const Finding& b) {
    if (a.loc.line != b.loc.line) return a.loc.line < b.loc.line;
    if (a.loc.col != b.loc.col) return a.loc.col < b.loc.col;
    std::string ca = to_string(a.chain), cb = to_string(b.chain);
    if (ca != cb) return ca < cb;
    return a.cwe < b.cwe;
  });
  return out;
}

}  // namespace shardsym
