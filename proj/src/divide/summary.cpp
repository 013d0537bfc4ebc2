#include "shardsym/divide/summary.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include "shardsym/divide/executor.hpp"
#include "shardsym/graphs/callgraph.hpp"

namespace shardsym {

const char* to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::Malloc: return "malloc";
    case FeatureKind::Free: return "free";
    case FeatureKind::Access: return "access";
    case FeatureKind::DbQuery: return "dbquery";
    case FeatureKind::CallSite: return "callsite";
    case FeatureKind::Store: return "store";
    case FeatureKind::Load: return "load";
  }
  return "?";
}

Feature instantiate(const Feature& f, const Instantiation& in) {
  Feature out = f;
  out.origin = instantiate(f.origin, in);
  if (f.value) out.value = instantiate(*f.value, in);
  out.query = instantiate(f.query, in);
  if (f.kind == FeatureKind::CallSite) {
    for (auto& a : out.args) a = instantiate(a, in);
    out.int_offset += in.int_offset;
    out.str_offset += in.str_offset;
    out.tag = in.prefix + f.tag;
  }
  return out;
}

Instantiation call_instantiation(const Feature& cs, const FunctionDecl& callee) {
  Instantiation in;
  for (size_t i = 0; i < callee.params.size() && i < cs.args.size(); ++i) in.params[callee.params[i].name] = cs.args[i];
  in.int_offset = cs.int_offset;
  in.str_offset = cs.str_offset;
  in.prefix = cs.tag;
  return in;
}

bool FunctionSummary::featureful() const {
  return std::any_of(entries.begin(), entries.end(), [](const SummaryEntry& e) { return e.featureful(); });
}

std::vector<AppliedEntry> apply_summary(const FunctionSummary& s, const FunctionDecl& callee,
                                        const std::vector<SymValue>& args, const sym::PathCondition& caller_pc,
                                        const AnalysisConfig& cfg, const std::string& tag, int int_offset,
                                        int str_offset) {
  Instantiation in;
  for (size_t i = 0; i < callee.params.size() && i < args.size(); ++i) in.params[callee.params[i].name] = args[i];
  in.int_offset = int_offset;
  in.str_offset = str_offset;
  in.prefix = tag;

  std::vector<AppliedEntry> out;
  for (size_t i = 0; i < s.entries.size(); ++i) {
    const SummaryEntry& e = s.entries[i];
    AppliedEntry a;
    a.guard = instantiate(e.guard, in);
    // Literals that fold to true say nothing; one that folds to false kills the entry.
    sym::PathCondition kept;
    bool dead = false;
    for (const auto& l : a.guard) {
      auto c = sym::const_value(l.as_constraint());
      if (c && *c != 0) continue;
      if (c && *c == 0) dead = true;
      kept.push_back(l);
    }
    if (dead) continue;
    a.guard = std::move(kept);
    if (cfg.prune_infeasible && !a.guard.empty()) {
      sym::PathCondition pc = caller_pc;
      pc.insert(pc.end(), a.guard.begin(), a.guard.end());
      if (sym::check_sat(pc, cfg.solver).unsat()) continue;
    }
    if (e.result) a.result = instantiate(*e.result, in);
    for (const auto& f : e.features) a.features.push_back(instantiate(f, in));
    a.entries = {static_cast<int>(i)};
    if (!e.featureful()) {
      bool merged = false;
      for (size_t o = 0; o < out.size() && !merged; ++o) {
        const SummaryEntry& first = s.entries[static_cast<size_t>(out[o].entries[0])];
        if (first.featureful() || first.int_inputs != e.int_inputs || first.str_inputs != e.str_inputs) continue;
        bool same = (!out[o].result && !a.result) ||
                    (out[o].result && a.result && same_value(*out[o].result, *a.result));
        if (!same) continue;
        out[o].entries.push_back(static_cast<int>(i));   // guards merged below
        merged = true;
      }
      if (merged) continue;
    }
    out.push_back(std::move(a));
  }

  // Replace each merged group's guard by the disjunction of its members' guards.
  for (size_t o = 0; o < out.size(); ++o) {
    if (out[o].entries.size() < 2) continue;
    std::vector<sym::Sym> parts;
    for (int i : out[o].entries) parts.push_back(sym::to_constraint(instantiate(s.entries[static_cast<size_t>(i)].guard, in)));
    sym::Sym disj = sym::disjunction(parts);
    if (sym::check_sat(sym::logical_not(disj), cfg.solver).unsat()) out[o].guard.clear();
    else out[o].guard = {{disj, true}};
  }
  return out;
}

FunctionSummary summarize_function(const TypedProgram& p, const FunctionDecl& f, const SummaryTable& summaries,
                                   const std::function<std::optional<std::string>(const std::string&)>& callee_key,
                                   const AnalysisConfig& cfg) {
  FunctionSummary sum;
  sum.function = f.name;
  sum.key = f.name;
  Executor ex(p, cfg, ExecMode::Summarize, &summaries, callee_key);
  ex.set_deadline(std::chrono::steady_clock::now() + std::chrono::milliseconds(static_cast<long long>(cfg.timeout_s * 1000)));
  try {
    ex.run(f, ex.initial_state(f), [&](ExecState&& s, std::optional<SymValue> result) {
      SummaryEntry e;
      e.guard = std::move(s.pc);
      e.result = std::move(result);
      e.features = std::move(s.features);
      e.fault = std::move(s.fault);
      e.callee_fault = s.callee_fault;
      e.int_inputs = s.ints;
      e.str_inputs = s.strs;
      sum.entries.push_back(std::move(e));
      if (static_cast<int>(sum.entries.size()) > cfg.paths_max)
        throw SummaryBudgetExceeded("more than " + std::to_string(cfg.paths_max) + " paths in " + f.name);
    });
  } catch (const SummaryBudgetExceeded& e) {
    sum.truncated = true;
    sum.entries.pop_back();
    sum.warnings.push_back(std::string("SummaryBudgetExceeded: ") + e.what());
  }
  if (ex.truncated()) sum.truncated = true;
  for (const auto& w : ex.warnings()) sum.warnings.push_back(w);
  return sum;
}

ProgramSummaries summarize_program(const TypedProgram& p, const AnalysisConfig& cfg) {
  ProgramSummaries out;
  CallGraph cg = build_call_graph(p);
  for (const Component& comp : bottom_up_order(cg)) {
    std::set<std::string> members(comp.begin(), comp.end());
    bool recursive = comp.size() > 1;
    for (const auto& e : cg.edges)
      if (e.caller == comp[0] && e.callee == comp[0]) recursive = true;
    auto outside = [&](const std::string& callee) -> std::optional<std::string> { return out.final_key.at(callee); };
    if (!recursive) {
      const FunctionDecl& f = p.function(comp[0]);
      FunctionSummary s = summarize_function(p, f, out.table, outside, cfg);
      for (const auto& w : s.warnings) out.warnings.push_back(f.name + ": " + w);
      out.final_key[f.name] = f.name;
      out.table[f.name] = std::move(s);
      continue;
    }
    // Bounded self-application: level k sees level k-1 of its component; level 1 cuts every recursive call.
    for (int level = 1; level <= cfg.call_depth; ++level) {
      for (const auto& name : comp) {
        auto resolver = [&](const std::string& callee) -> std::optional<std::string> {
          if (!members.count(callee)) return outside(callee);
          if (level == 1) return std::nullopt;
          return callee + "@" + std::to_string(level - 1);
        };
        FunctionSummary s = summarize_function(p, p.function(name), out.table, resolver, cfg);
        s.key = name + "@" + std::to_string(level);
        s.level = level;
        // Level 1 carries the cut-off warnings; the final level everything else.
        if (level == 1 || level == cfg.call_depth)
          for (const auto& w : s.warnings) out.warnings.push_back(name + ": " + w);
        out.table[s.key] = std::move(s);
      }
    }
    for (const auto& name : comp) out.final_key[name] = name + "@" + std::to_string(cfg.call_depth);
  }
  std::sort(out.warnings.begin(), out.warnings.end());
  out.warnings.erase(std::unique(out.warnings.begin(), out.warnings.end()), out.warnings.end());
  return out;
}

}  // namespace shardsym
