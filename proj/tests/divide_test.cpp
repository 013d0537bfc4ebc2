#include <doctest.h>

#include <functional>

#include "corpus.hpp"
#include "widening.hpp"
#include "shardsym/divide/summary.hpp"
#include "shardsym/interp/interp.hpp"

using namespace shardsym;
using shardsym::testing::corpus_files;

namespace {

const char* kF = "fn f(x: int, y: int) -> int { if (x > 10) { return y; } else { return x; } }\n";
const char* kNode = "record Node { val: int; next: Ref(Node); }\n";

const FunctionSummary& summary_of(const ProgramSummaries& s, const std::string& fn) { return s.of(fn); }

sym::Assignment params(std::initializer_list<std::pair<const char*, int>> kv) {
  sym::Assignment a;
  for (const auto& [k, v] : kv) a[sym::VarKey::param(k)] = v;
  return a;
}

bool holds(const sym::PathCondition& pc, const sym::Assignment& a) { return sym::evaluate(sym::to_constraint(pc), a) != 0; }

sym::PathCondition prefix(const sym::PathCondition& pc, size_t n) { return {pc.begin(), pc.begin() + static_cast<long>(n)}; }

}  // namespace

TEST_CASE("summary of the two-path example maps guards to results") {
  auto p = load_program(std::string(kF) + "fn main() { }");
  auto s = summarize_program(p, {});
  const auto& f = summary_of(s, "f");
  CHECK_FALSE(f.truncated);
  REQUIRE(f.entries.size() == 2);
  for (const auto& e : f.entries) {
    CHECK(e.features.empty());
    REQUIRE(e.result);
    std::string r = to_string(*e.result);
    for (int x = -8; x <= 20; ++x) {
      bool big = holds(e.guard, params({{"x", x}, {"y", 0}}));
      CHECK(big == (r == "y" ? x > 10 : x <= 10));
    }
    CHECK((r == "y" || r == "x"));
  }
  CHECK(to_string(*f.entries[0].result) != to_string(*f.entries[1].result));
}

TEST_CASE("constant function has one unguarded entry") {
  auto p = load_program("fn c() -> int { return 7; } fn main() { }");
  auto s = summarize_program(p, {});
  const auto& c = summary_of(s, "c");
  REQUIRE(c.entries.size() == 1);
  CHECK(c.entries[0].guard.empty());
  CHECK(to_string(*c.entries[0].result) == "7");
  CHECK(c.entries[0].features.empty());
  CHECK_FALSE(c.featureful());
}

TEST_CASE("conditional allocation becomes a guarded malloc feature") {
  auto p = load_program(std::string(kNode) +
                        "fn g(x: int, a: int) { if (x > 4 && a < 100) { let n: Ref(Node) = alloc(Node); } }\n"
                        "fn main() { }");
  auto s = summarize_program(p, {});
  const auto& g = summary_of(s, "g");
  // One entry per explored path; exactly one carries the feature.
  REQUIRE(g.entries.size() == 2);
  int with = 0;
  for (const auto& e : g.entries) {
    if (e.features.empty()) continue;
    ++with;
    REQUIRE(e.features.size() == 1);
    const Feature& m = e.features[0];
    CHECK(m.kind == FeatureKind::Malloc);
    CHECK(m.record == "Node");
    CHECK(m.size == 12);
    auto guard = prefix(e.guard, m.guard_len);
    for (int x = -8; x <= 8; ++x)
      for (int a : {-8, 0, 98, 99, 100, 101})
        CHECK(holds(guard, params({{"x", x}, {"a", a}})) == (x > 4 && a < 100));
  }
  CHECK(with == 1);
}

TEST_CASE("applying a summary substitutes and prunes") {
  auto p = load_program(std::string(kF) + "fn main() { }");
  auto s = summarize_program(p, {});
  const auto& f = summary_of(s, "f");
  const auto& decl = p.function("f");
  AnalysisConfig cfg;

  SUBCASE("constant first argument folds one guard away") {
    auto r = apply_summary(f, decl, {sym::constant(3), sym::param_var("w")}, {}, cfg);
    REQUIRE(r.size() == 1);
    CHECK(r[0].guard.empty());
    CHECK(to_string(*r[0].result) == "3");
  }
  SUBCASE("symbolic arguments keep both branches") {
    auto r = apply_summary(f, decl, {sym::param_var("u"), sym::param_var("w")}, {}, cfg);
    REQUIRE(r.size() == 2);
    std::set<std::string> results;
    for (const auto& a : r) results.insert(to_string(*a.result));
    CHECK(results == std::set<std::string>{"u", "w"});
  }
  SUBCASE("caller path condition prunes the infeasible branch") {
    sym::Sym x = sym::param_var("x");
    sym::PathCondition pc = {{sym::binary(BinOp::Lt, x, sym::constant(0)), true}};
    auto r = apply_summary(f, decl, {x, sym::param_var("w")}, pc, cfg);
    REQUIRE(r.size() == 1);
    CHECK(to_string(*r[0].result) == "x");
  }
  SUBCASE("featureless entries with equal results merge") {
    auto q = load_program("fn h(x: int) -> int { if (x > 0) { return 1; } if (x < 0 - 5) { return 1; } return 1; } fn main() { }");
    auto qs = summarize_program(q, {});
    REQUIRE(summary_of(qs, "h").entries.size() == 3);
    auto r = apply_summary(summary_of(qs, "h"), q.function("h"), {sym::param_var("v")}, {}, cfg);
    REQUIRE(r.size() == 1);
    CHECK(r[0].entries.size() == 3);
    CHECK(r[0].guard.empty());   // the disjunction covers the domain
  }
  SUBCASE("unknowns are renamed per application") {
    auto q = load_program(std::string(kNode) + "fn rd(n: Ref(Node)) -> int { return n->val; } fn main() { }");
    auto qs = summarize_program(q, {});
    auto a = apply_summary(summary_of(qs, "rd"), q.function("rd"), {Origin::alloc("a0.0", "Node")}, {}, cfg, "c0.0/");
    auto b = apply_summary(summary_of(qs, "rd"), q.function("rd"), {Origin::alloc("a0.0", "Node")}, {}, cfg, "c1.0/");
    REQUIRE(a.size() == 1);
    REQUIRE(b.size() == 1);
    CHECK(to_string(*a[0].result) != to_string(*b[0].result));
  }
}

TEST_CASE("in-range checks") {
  auto find = [](const std::string& src) {
    auto p = load_program(std::string(kNode) + src);
    auto s = summarize_program(p, {});
    std::vector<RangeFinding> out;
    for (const auto& e : s.of("k").entries)
      if (e.fault) out.push_back(*e.fault);
    return out;
  };
  SUBCASE("index that may reach the length") {
    auto r = find("fn k(i: int) -> int { let buf: [int; 10] = 0; if (i <= 10) { return buf[i]; } return 0; } fn main() { }");
    REQUIRE(r.size() == 1);
    CHECK(r[0].kind == FaultKind::OutOfBoundsAccess);
  }
  SUBCASE("constant in-range index") {
    auto r = find("fn k() -> int { let buf: [int; 10] = 0; return buf[3]; } fn main() { }");
    CHECK(r.empty());
  }
  SUBCASE("guarded index stays in range") {
    auto r = find("fn k(i: int) -> int { let buf: [int; 10] = 0; if (i >= 0 && i < 10) { return buf[i]; } return 0; } fn main() { }");
    CHECK(r.empty());
  }
  SUBCASE("use after free within one function") {
    auto r = find("fn k(p: Ref(Node)) -> int { free(p); return p->val; } fn main() { }");
    REQUIRE(r.size() == 1);
    CHECK(r[0].kind == FaultKind::UseAfterFree);
  }
  SUBCASE("double free within one function") {
    auto r = find("fn k() { let p: Ref(Node) = alloc(Node); free(p); free(p); } fn main() { }");
    REQUIRE(r.size() == 1);
    CHECK(r[0].kind == FaultKind::DoubleFree);
  }
  SUBCASE("free of a never-allocated reference") {
    auto r = find("fn k() { let p: Ref(Node) = alloc(Node); free(p->next); } fn main() { }");
    REQUIRE(r.size() == 1);
    CHECK(r[0].kind == FaultKind::InvalidFree);
  }
}

TEST_CASE("frees of reference parameters are captured as features") {
  auto p = load_program(std::string(kNode) + "fn d(n: Ref(Node)) { free(n); } fn main() { }");
  auto s = summarize_program(p, {});
  const auto& e = s.of("d").entries.at(0);
  REQUIRE(e.features.size() == 1);
  CHECK(e.features[0].kind == FeatureKind::Free);
  CHECK(e.features[0].origin.str() == "param:n");
}

TEST_CASE("loop bound truncates and is reported") {
  auto p = load_program("fn w(n: int) -> int { let i: int = 0; while (i < n) { i = i + 1; } return i; } fn main() { }");
  AnalysisConfig cfg;
  cfg.loop_bound = 3;
  auto s = summarize_program(p, cfg);
  const auto& w = s.of("w");
  CHECK(w.truncated);
  CHECK(w.entries.size() == 4);   // 0..3 iterations
  CHECK_FALSE(s.warnings.empty());
}

TEST_CASE("recursion is summarized to the call-depth bound") {
  auto p = load_program("fn fact(n: int) -> int { if (n <= 1) { return 1; } return n * fact(n - 1); } fn main() { }");
  AnalysisConfig cfg;
  cfg.call_depth = 3;
  auto s = summarize_program(p, cfg);
  CHECK(s.final_key.at("fact") == "fact@3");
  CHECK(s.table.count("fact@1"));
  CHECK(s.table.count("fact@2"));
  const auto& f = s.of("fact");
  CHECK(f.truncated);
  CHECK(f.entries.size() == 4);
  CHECK_FALSE(s.warnings.empty());
}

TEST_CASE("path budget exhaustion is reported, not silent") {
  auto p = load_program(
      "fn m(a: int, b: int, c: int) -> int { let r: int = 0;"
      " if (a > 0) { r = r + 1; } if (b > 0) { r = r + 2; } if (c > 0) { r = r + 4; } return r; } fn main() { }");
  AnalysisConfig cfg;
  cfg.paths_max = 5;
  auto s = summarize_program(p, cfg);
  CHECK(s.of("m").truncated);
  CHECK(s.of("m").entries.size() == 5);
  bool mentioned = false;
  for (const auto& w : s.warnings) mentioned |= w.find("SummaryBudgetExceeded") != std::string::npos;
  CHECK(mentioned);
}

TEST_CASE("every guard set of a complete summary covers the domain") {
  auto p = load_program(std::string(kF) +
                        "fn z(a: int, b: int) -> int { if (a + b > 3 || a < 0 - 2) { return a; } if (b == 5) { return 1; } return 0; }\n"
                        "fn main() { }");
  auto s = summarize_program(p, {});
  for (const char* fn : {"f", "z"}) {
    std::vector<sym::Sym> guards;
    for (const auto& e : s.of(fn).entries) guards.push_back(sym::to_constraint(e.guard));
    CHECK(sym::check_sat(sym::logical_not(sym::disjunction(guards))).unsat());
  }
}

TEST_CASE("widening: every concrete result is matched by a guard-satisfied entry") {
  // Functions whose parameters are all int, at most three of them; brute force over -8..7.
  for (const char* corpus : {"simple", "complex"}) {
    for (const auto& file : corpus_files(corpus)) {
      auto p = load_program_file(file);
      auto s = summarize_program(p, {});
      for (const auto& f : p.program().functions) {
        if (!testing::widening_candidate(f)) continue;
        CAPTURE(file);
        CAPTURE(f.name);
        auto w = testing::check_widening(p, s, f);
        CHECK(w.runs > 0);
        CHECK(w.unmatched.empty());
        // Feature completeness: the concrete heap/query events appear in order in some matching entry.
        CHECK(w.unordered.empty());
      }
    }
  }
}
