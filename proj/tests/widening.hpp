#pragma once

// Brute-force widening check: every concrete run of a function with at most
// three int parameters must be matched by some summary entry whose guard the
// run's arguments satisfy.

#include <algorithm>
#include <string>
#include <vector>

#include "shardsym/divide/summary.hpp"
#include "shardsym/interp/interp.hpp"

namespace shardsym::testing {

// Substitutes concrete parameter values and zero inputs (an empty tape);
// remaining unknowns stay free.
inline sym::Sym ground(const sym::Sym& s, const FunctionDecl& f, const std::vector<std::int32_t>& args) {
  return sym::substitute(s, [&](const sym::VarKey& k) -> std::optional<sym::Sym> {
    if (k.kind == sym::VarKey::Kind::Input) return sym::constant(0);
    if (k.kind == sym::VarKey::Kind::Param)
      for (size_t i = 0; i < f.params.size(); ++i)
        if (f.params[i].name == k.name) return sym::constant(args[i]);
    return std::nullopt;
  });
}

// True if some assignment of the remaining unknowns satisfies `c`.
inline bool satisfiable(const sym::Sym& c) {
  if (auto v = sym::const_value(c)) return *v != 0;
  sym::SolverConfig cfg;
  cfg.domain = {-100000, 100000};
  return sym::check_sat(c, cfg).sat();
}

struct Event {
  FeatureKind kind;
  int line;
  bool operator==(const Event&) const = default;
};

// Concrete-comparable events of an entry, with callee entries spliced in.
inline void flatten(const ProgramSummaries& s, const SummaryEntry& e, std::vector<Event>& out) {
  for (const auto& f : e.features) {
    if (f.kind == FeatureKind::CallSite) {
      flatten(s, s.table.at(f.summary_key).entries.at(static_cast<size_t>(f.entry)), out);
    } else if (f.kind != FeatureKind::Store && f.kind != FeatureKind::Load) {
      out.push_back({f.kind, f.loc.line});
    }
  }
}

inline std::vector<Event> concrete_events(const RunOutcome& o) {
  std::vector<Event> out;
  for (const auto& t : o.trace) {
    FeatureKind k = t.kind == EventKind::Malloc ? FeatureKind::Malloc
                    : t.kind == EventKind::Free ? FeatureKind::Free
                    : t.kind == EventKind::Access ? FeatureKind::Access
                                                  : FeatureKind::DbQuery;
    out.push_back({k, t.loc.line});
  }
  return out;
}

inline bool widening_candidate(const FunctionDecl& f) {
  return f.params.size() <= 3 &&
         std::all_of(f.params.begin(), f.params.end(), [](const Param& q) { return q.type.is_int(); });
}

struct WideningResult {
  long runs = 0;
  std::vector<std::string> unmatched;   // "fn(args)" with no matching entry
  std::vector<std::string> unordered;   // matched, but no entry carries the concrete events in order
};

/// Runs `f` on every argument tuple over -8..7 and checks it against its summary.
inline WideningResult check_widening(const TypedProgram& p, const ProgramSummaries& s, const FunctionDecl& f) {
  WideningResult out;
  const auto& sum = s.of(f.name);
  std::vector<std::int32_t> args(f.params.size(), -8);
  for (;;) {
    RunOutcome o = call_function(p, f.name, args, {});
    if (o.status != RunOutcome::Status::FuelExhausted) {
      ++out.runs;
      std::vector<Event> seen = concrete_events(o);
      bool matched = false, ordered = false;
      for (const auto& e : sum.entries) {
        sym::Sym g = ground(sym::to_constraint(e.guard), f, args);
        if (o.faulted()) {
          if (!e.terminates()) continue;
        } else {
          if (e.terminates()) continue;
          auto* r = o.result ? std::get_if<std::int32_t>(&*o.result) : nullptr;
          if (r && e.result && std::holds_alternative<sym::Sym>(*e.result))
            g = sym::binary(BinOp::And, g,
                            sym::binary(BinOp::Eq, ground(std::get<sym::Sym>(*e.result), f, args), sym::constant(*r)));
        }
        if (!satisfiable(g)) continue;
        matched = true;
        std::vector<Event> ev;
        flatten(s, e, ev);
        ordered |= ev == seen;
      }
      std::string call = f.name + "(";
      for (size_t i = 0; i < args.size(); ++i) call += (i ? "," : "") + std::to_string(args[i]);
      call += ")";
      if (!matched) out.unmatched.push_back(call);
      else if (!ordered && !sum.truncated) out.unordered.push_back(call);
    }
    size_t i = 0;
    while (i < args.size() && args[i] == 7) args[i++] = -8;
    if (i == args.size()) break;
    ++args[i];
  }
  return out;
}

}  // namespace shardsym::testing
