#include <doctest.h>

#include <algorithm>

#include "corpus.hpp"
#include "shardsym/verify/verify.hpp"

using namespace shardsym;
using shardsym::testing::corpus_files;
using shardsym::testing::corpus_program;

namespace {

const std::vector<WeaknessModel>& models() {
  static const std::vector<WeaknessModel> m = load_models(std::string(SHARDSYM_SOURCE_DIR) + "/models");
  return m;
}

struct Analysis {
  TypedProgram p;
  ProgramSummaries s;
  ConquerResult c;
};

Analysis analyze(TypedProgram p, const AnalysisConfig& cfg = {}) {
  Analysis a{std::move(p), {}, {}};
  a.s = summarize_program(a.p, cfg);
  a.c = conquer(a.p, a.s, models(), cfg);
  return a;
}

const char* kNode = "record Node { val: int; next: Ref(Node); }\n";

}  // namespace

TEST_CASE("uaf_basic verifies with an input above ten and the witness replays") {
  Analysis a = analyze(corpus_program("simple", "uaf_basic"));
  auto fs = verify_all(a.p, a.s, a.c.candidates, {});
  REQUIRE(fs.size() == 1);
  const Finding& f = fs[0];
  CHECK(f.cwe == "CWE-416");
  CHECK(f.status == FindingStatus::Verified);
  CHECK(f.loc.line == 14);
  REQUIRE(f.witness.ints.size() == 1);
  CHECK(f.witness.ints[0] > 10);
  CHECK(replay_witness(a.p, f.witness, {*f.fault, f.loc, f.chain}));
}

TEST_CASE("a callee guard contradicted by its caller is refuted at step 1") {
  std::string src = std::string(kNode) +
                    "fn g(x: int) { if (x > 10) { let n: Ref(Node) = alloc(Node); free(n); free(n); } }\n"
                    "fn main() { let x: int = input(); if (x < 5) { g(x); } }\n";
  AnalysisConfig cfg;
  cfg.prune_infeasible = false;
  Analysis a = analyze(load_program(src), cfg);
  REQUIRE_FALSE(a.c.candidates.empty());
  for (const auto& c : a.c.candidates) {
    BackwardResult r = backward_verify(a.p, a.s, c, cfg);
    CHECK(r.status == FindingStatus::Refuted);
    CHECK(r.step == 1);
  }
  auto fs = verify_all(a.p, a.s, a.c.candidates, cfg);
  REQUIRE(fs.size() == 1);
  CHECK(fs[0].status == FindingStatus::Refuted);
  CHECK(fs[0].refuted_step == 1);

  // With pruning the contradiction is dropped before it becomes a candidate.
  CHECK(analyze(load_program(src)).c.candidates.empty());
}

TEST_CASE("the innermost unsatisfiable step is reported") {
  std::string src = std::string(kNode) +
                    "fn g(x: int) { if (x > 10) { if (x < 3) { let n: Ref(Node) = alloc(Node); free(n); free(n); } } }\n"
                    "fn main() { let x: int = input(); if (x < 5) { g(x); } }\n";
  AnalysisConfig cfg;
  cfg.prune_infeasible = false;
  Analysis a = analyze(load_program(src), cfg);
  REQUIRE_FALSE(a.c.candidates.empty());
  for (const auto& c : a.c.candidates) CHECK(backward_verify(a.p, a.s, c, cfg).step == 0);
}

TEST_CASE("an unconditional weakness in main verifies with an empty tape") {
  Analysis a = analyze(load_program(std::string(kNode) + "fn main() { let n: Ref(Node) = alloc(Node); free(n); free(n); }\n"));
  auto fs = verify_all(a.p, a.s, a.c.candidates, {});
  REQUIRE(fs.size() == 1);
  CHECK(fs[0].status == FindingStatus::Verified);
  CHECK(fs[0].witness.empty());
  CHECK(replay_witness(a.p, fs[0].witness, {FaultKind::DoubleFree, fs[0].loc, fs[0].chain}));
}

TEST_CASE("tape synthesis") {
  sym::Assignment m;
  m[sym::VarKey::input(0)] = 12;
  CHECK(synthesize_tape(m, 1, 0) == InputTape{{12}, {}});
  CHECK(synthesize_tape({}, 0, 0).empty());
  CHECK(synthesize_tape(m, 3, 0).ints == std::vector<std::int32_t>{12, 0, 0});
  InputTape t = synthesize_tape({}, 0, 2, 1);
  CHECK(t.strs == std::vector<std::string>{"", "SELECT"});
}

TEST_CASE("injection witnesses carry the keyword in the unsanitized slot") {
  Analysis a = analyze(corpus_program("simple", "sqli_nested"));
  auto fs = verify_all(a.p, a.s, a.c.candidates, {});
  REQUIRE(fs.size() == 1);
  CHECK(fs[0].status == FindingStatus::Verified);
  REQUIRE_FALSE(fs[0].witness.strs.empty());
  CHECK(std::count(fs[0].witness.strs.begin(), fs[0].witness.strs.end(), "SELECT") == 1);
  CHECK(replay_witness(a.p, fs[0].witness, {FaultKind::UnsanitizedQuery, fs[0].loc, fs[0].chain}));

  Analysis b = analyze(load_program(
      "fn main() { let a: str = input_str(); let b: str = input_str(); db_query(concat(sanitize(a), b)); }\n"));
  auto gs = verify_all(b.p, b.s, b.c.candidates, {});
  REQUIRE(gs.size() == 1);
  CHECK(gs[0].witness.strs == std::vector<std::string>{"", "SELECT"});
}

TEST_CASE("leaks are warnings and skip verification") {
  Analysis a = analyze(corpus_program("simple", "leak_fig3"));
  auto fs = verify_all(a.p, a.s, a.c.candidates, {});
  REQUIRE(fs.size() == 1);
  CHECK(fs[0].status == FindingStatus::Warning);
  CHECK(fs[0].cwe == "CWE-401");
}

TEST_CASE("a heap placement the concrete allocator does not make is not verified") {
  // The abstract heap may place m in n's old block; the concrete allocator
  // reuses the most recently freed block, which is k's.
  std::string src = std::string(kNode) +
                    "record Msg { a: int; b: int; }\n"
                    "fn main() {\n"
                    "  let n: Ref(Node) = alloc(Node);\n"
                    "  let k: Ref(Node) = alloc(Node);\n"
                    "  free(n);\n"
                    "  free(k);\n"
                    "  let m: Ref(Msg) = alloc(Msg);\n"
                    "  let v: int = n->val;\n"
                    "}\n";
  Analysis a = analyze(load_program(src));
  bool saw_mismatch = false;
  for (const auto& c : a.c.candidates) {
    Finding f = verify_candidate(a.p, a.s, c, {});
    if (f.reason.rfind("PlacementMismatch", 0) == 0) {
      saw_mismatch = true;
      CHECK(f.status == FindingStatus::Unknown);
    }
  }
  CHECK(saw_mismatch);
  auto fs = verify_all(a.p, a.s, a.c.candidates, {});
  REQUIRE(fs.size() == 1);
  CHECK(fs[0].status == FindingStatus::Verified);
  CHECK(replay_witness(a.p, fs[0].witness, {FaultKind::UseAfterFree, fs[0].loc, fs[0].chain}));
}

TEST_CASE("every verified finding on the simple corpus replays") {
  for (const auto& file : corpus_files("simple")) {
    Analysis a = analyze(load_program_file(file));
    for (const auto& f : verify_all(a.p, a.s, a.c.candidates, {})) {
      if (f.status != FindingStatus::Verified || !f.fault) continue;
      CHECK_MESSAGE(replay_witness(a.p, f.witness, {*f.fault, f.loc, f.chain}), file << " " << f.cwe);
    }
  }
}

TEST_CASE("findings are sorted and deterministic") {
  Analysis a = analyze(corpus_program("simple", "uaf_fig3"));
  auto one = verify_all(a.p, a.s, a.c.candidates, {});
  auto two = verify_all(a.p, a.s, a.c.candidates, {});
  REQUIRE(one.size() == two.size());
  for (size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].witness == two[i].witness);
    CHECK(one[i].status == two[i].status);
  }
  CHECK(one[0].candidates == 2);
}
