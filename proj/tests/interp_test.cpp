#include <doctest.h>

#include <random>

#include "corpus.hpp"
#include "shardsym/interp/interp.hpp"

using namespace shardsym;
using shardsym::testing::corpus_files;
using shardsym::testing::corpus_program;

namespace {

const char* kNode = "record Node { val: int; next: Ref(Node); }\nrecord Msg { a: int; b: int; }\n";

TypedProgram prog(const std::string& body) { return load_program(std::string(kNode) + body); }

}  // namespace

TEST_CASE("zero tape without allocation completes with no leaks") {
  auto p = prog("fn main() { let x: int = input(); let y: int = x * 3; }");
  RunOutcome o = run(p, {});
  CHECK(o.status == RunOutcome::Status::Completed);
  CHECK(o.leaks.empty());
  CHECK(o.trace.empty());
}

TEST_CASE("an allocation that is never freed is the leak set") {
  auto p = prog("fn main() {\n  let n: Ref(Node) = alloc(Node);\n  n->val = 1;\n}");
  RunOutcome o = run(p, {});
  REQUIRE(o.status == RunOutcome::Status::Completed);
  REQUIRE(o.leaks.size() == 1);
  CHECK(o.leaks[0].block == o.trace[0].block);
  CHECK(o.leaks[0].loc.line == 4);   // two record lines precede main
  CHECK(o.leaks[0].record == "Node");
}

TEST_CASE("uaf_basic faults with a type-confused use after free on input 12") {
  auto p = corpus_program("simple", "uaf_basic");
  RunOutcome o = run(p, {{12}, {}});
  REQUIRE(o.faulted());
  CHECK(o.fault == FaultKind::TypeConfusedUseAfterFree);
  CHECK(o.fault_loc.line == 14);
  CHECK(to_string(o.fault_chain) == "main");
  // The Msg allocation took the freed Node block.
  REQUIRE(o.trace.size() >= 4);
  CHECK(o.trace[2].kind == EventKind::Free);
  CHECK(o.trace[3].kind == EventKind::Malloc);
  CHECK(o.trace[3].placement == sym::Placement::reuse_of(o.trace[0].block));

  ExpectedFault want{FaultKind::UseAfterFree, {14, 17}, {{"main", -1}}};
  CHECK(replay_witness(p, {{12}, {}}, want));
  CHECK(replay_witness(p, {{11}, {}}, want));
  // Negative control: one flipped int no longer reaches the free.
  CHECK_FALSE(replay_witness(p, {{-12}, {}}, want));
  CHECK_FALSE(replay_witness(p, {{10}, {}}, want));
}

TEST_CASE("unconditional fault confirms with an empty tape") {
  auto p = prog("fn main() {\n  let n: Ref(Node) = alloc(Node);\n  free(n);\n  free(n);\n}");
  CHECK(replay_witness(p, {}, {FaultKind::DoubleFree, {6, 3}, {}}));
  CHECK_FALSE(replay_witness(p, {}, {FaultKind::UseAfterFree, {6, 3}, {}}));
}

TEST_CASE("unsanitized query input containing a keyword faults") {
  auto p = corpus_program("simple", "sqli_basic");
  RunOutcome hit = run(p, {{}, {"x' or name LIKE '%"}});
  REQUIRE(hit.faulted());
  CHECK(hit.fault == FaultKind::UnsanitizedQuery);
  CHECK(hit.keyword == "LIKE");
  RunOutcome lower = run(p, {{}, {"select"}});
  REQUIRE(lower.faulted());
  CHECK(lower.keyword == "SELECT");
  // The literal part of the query holds SELECT, but only input text counts.
  CHECK(run(p, {{}, {"bob"}}).status == RunOutcome::Status::Completed);
  CHECK(run(p, {}).status == RunOutcome::Status::Completed);

  auto s = prog("fn main() { db_query(concat(\"SELECT \", sanitize(input_str()))); }");
  CHECK(run(s, {{}, {"SELECT"}}).status == RunOutcome::Status::Completed);
}

TEST_CASE("null access and null free are their own fault kinds") {
  auto a = prog("fn main() {\n  let n: Ref(Node) = alloc(Node);\n  let m: Ref(Node) = n->next;\n  let v: int = m->val;\n}");
  RunOutcome o = run(a, {});
  REQUIRE(o.faulted());
  CHECK(o.fault == FaultKind::InvalidAccess);
  auto f = prog("fn main() {\n  let n: Ref(Node) = alloc(Node);\n  free(n->next);\n}");
  CHECK(run(f, {}).fault == FaultKind::InvalidFree);
}

TEST_CASE("array bounds are checked on reads and writes") {
  auto p = corpus_program("simple", "oob_basic");
  CHECK(run(p, {{9}, {}}).status == RunOutcome::Status::Completed);
  RunOutcome o = run(p, {{10}, {}});
  REQUIRE(o.faulted());
  CHECK(o.fault == FaultKind::OutOfBoundsAccess);
  CHECK(o.fault_loc.line == 7);
}

TEST_CASE("call chains record call-site ids") {
  auto p = corpus_program("simple", "uaf_fig3");
  RunOutcome o = run(p, {{3}, {}});
  REQUIRE(o.faulted());
  CHECK(o.fault == FaultKind::TypeConfusedUseAfterFree);
  CHECK(to_string(o.fault_chain) == "main>use#3");
  CHECK(run(p, {{4}, {}}).status == RunOutcome::Status::Completed);
}

TEST_CASE("call_function returns the concrete result") {
  auto p = load_program("fn f(x: int, y: int) -> int { if (x > 10) { return y; } else { return x; } } fn main() { }");
  CHECK(std::get<std::int32_t>(*call_function(p, "f", {11, 5}, {}).result) == 5);
  CHECK(std::get<std::int32_t>(*call_function(p, "f", {10, 5}, {}).result) == 10);
}

TEST_CASE("fuel bounds non-terminating programs") {
  auto p = load_program("fn main() { let i: int = 0; while (i == 0) { i = 0; } }");
  RunOutcome o = run(p, {}, {1000});
  CHECK(o.status == RunOutcome::Status::FuelExhausted);
  CHECK(o.steps > 1000);
}

TEST_CASE("runs are deterministic and the trace folds through the heap model") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> d(-8, 7);
  for (const auto& file : corpus_files("simple")) {
    CAPTURE(file);
    auto p = load_program_file(file);
    for (int round = 0; round < 20; ++round) {
      InputTape t;
      for (int i = 0; i < 3; ++i) t.ints.push_back(d(rng));
      t.strs = {round % 2 ? "SELECT" : "bob", "x"};
      RunOutcome a = run(p, t), b = run(p, t);
      REQUIRE(a.trace.size() == b.trace.size());
      CHECK(a.status == b.status);
      CHECK(a.steps == b.steps);
      for (size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].kind == b.trace[i].kind);
        CHECK(a.trace[i].block == b.trace[i].block);
        CHECK(a.trace[i].loc == b.trace[i].loc);
      }
      // Fold heap events through the abstract heap with the deterministic reuse rule.
      sym::HeapState h;
      std::optional<FaultKind> verdict;
      for (const auto& e : a.trace) {
        if (e.kind == EventKind::Malloc) {
          auto [next, id] = h.alloc(e.record, e.size, sym::AllocMode::Deterministic)[0];
          CHECK(id == e.block);
          CHECK(next.block(id)->placement == e.placement);
          h = std::move(next);
        } else if (e.kind == EventKind::Free) {
          auto r = h.free(e.block);
          if (auto* f = std::get_if<sym::HeapFault>(&r)) verdict = f->kind;
          else h = std::get<sym::HeapState>(std::move(r));
        } else if (e.kind == EventKind::Access) {
          if (auto f = h.access(e.block, e.record)) verdict = f->kind;
        }
        if (verdict) break;
      }
      bool heap_fault = a.faulted() && (a.fault == FaultKind::UseAfterFree || a.fault == FaultKind::DoubleFree ||
                                        a.fault == FaultKind::TypeConfusedUseAfterFree);
      CHECK(heap_fault == verdict.has_value());
      if (heap_fault && verdict) CHECK(*verdict == a.fault);
      if (a.status == RunOutcome::Status::Completed) CHECK(a.leaks.size() == h.allocated().size());
    }
  }
}

TEST_CASE("well-typed corpus programs never hit an operand of the wrong kind") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> d(-20, 20);
  const char* words[] = {"", "bob", "SELECT", "x LIKE y", "*"};
  for (const char* corpus : {"simple", "complex", "deep"}) {
    for (const auto& file : corpus_files(corpus)) {
      CAPTURE(file);
      auto p = load_program_file(file);
      for (int round = 0; round < 30; ++round) {
        InputTape t;
        for (int i = 0; i < 8; ++i) t.ints.push_back(d(rng));
        for (int i = 0; i < 3; ++i) t.strs.push_back(words[static_cast<size_t>(round + i) % 5]);
        CHECK_NOTHROW(run(p, t));
      }
    }
  }
}
