#include <doctest.h>

#include <algorithm>
#include <random>

#include "corpus.hpp"
#include "shardsym/conquer/conquer.hpp"

using namespace shardsym;
using shardsym::testing::corpus_program;

namespace {

const std::vector<WeaknessModel>& models() {
  static const std::vector<WeaknessModel> m = load_models(std::string(SHARDSYM_SOURCE_DIR) + "/models");
  return m;
}

const WeaknessModel& model(const std::string& cwe) {
  for (const auto& m : models())
    if (m.cwe == cwe) return m;
  throw std::runtime_error("no model " + cwe);
}

std::vector<std::shared_ptr<const FeaturePath>> paths_of(const TypedProgram& p, const AnalysisConfig& cfg = {}) {
  ProgramSummaries s = summarize_program(p, cfg);
  std::vector<std::shared_ptr<const FeaturePath>> out;
  enumerate_feature_paths(p, s, cfg, [&](std::shared_ptr<const FeaturePath> fp) {
    out.push_back(std::move(fp));
    return true;
  });
  return out;
}

std::vector<PathEventKind> kinds(const FeaturePath& fp) {
  std::vector<PathEventKind> out;
  for (const auto& e : fp.events) out.push_back(e.kind);
  return out;
}

std::vector<Candidate> candidates(const TypedProgram& p, const AnalysisConfig& cfg = {}) {
  ProgramSummaries s = summarize_program(p, cfg);
  return conquer(p, s, models(), cfg).candidates;
}

size_t count_cwe(const std::vector<Candidate>& cs, const std::string& cwe) {
  return static_cast<size_t>(std::count_if(cs.begin(), cs.end(), [&](const Candidate& c) { return c.model->cwe == cwe; }));
}

PathEvent ev(PathEventKind k, sym::BlockId b, const std::string& record, int line,
             sym::Placement pl = sym::Placement::fresh()) {
  PathEvent e;
  e.kind = k;
  e.block = b;
  e.record = record;
  e.loc = {line, 1};
  e.placement = pl;
  return e;
}

}  // namespace

TEST_CASE("intended path of the leak example: malloc in f, access in g, one path, no free") {
  TypedProgram p = corpus_program("simple", "leak_fig3");
  auto ps = paths_of(p);
  REQUIRE(ps.size() == 1);
  // f also writes the new node, so f contributes an access of its own.
  const auto& evs = ps[0]->events;
  CHECK(kinds(*ps[0]) == std::vector<PathEventKind>{PathEventKind::Malloc, PathEventKind::Access, PathEventKind::Access,
                                                    PathEventKind::End});
  CHECK(to_string(evs[0].chain) == "main>f#0");
  CHECK(to_string(evs[2].chain) == "main>g#1");
  CHECK(evs[2].block == evs[0].block);

  auto cs = candidates(p);
  REQUIRE(cs.size() == 1);
  CHECK(cs[0].model->cwe == "CWE-401");
  CHECK(cs[0].model->severity == "warning");
  CHECK(cs[0].key_event().loc.line == 5);
}

TEST_CASE("free, reallocation with another record, stale access: the four events in order and one UAF") {
  TypedProgram p = corpus_program("simple", "uaf_fig3");
  auto ps = paths_of(p);
  bool found = false;
  for (const auto& fp : ps) {
    std::vector<std::string> seq;
    for (const auto& e : fp->events) seq.push_back(std::string(to_string(e.kind)) + "@" + e.chain.back().function);
    auto at = [&](const std::string& s, size_t from) {
      auto it = std::find(seq.begin() + static_cast<long>(from), seq.end(), s);
      return it == seq.end() ? seq.size() : static_cast<size_t>(it - seq.begin());
    };
    size_t a = at("malloc@make", 0), b = at("free@drop", a), c = at("malloc@other", b), d = at("access@use", c);
    if (d < seq.size() && fp->events[c].placement.reuse && fp->events[c].placement.target == fp->events[a].block) found = true;
  }
  CHECK(found);

  auto cs = candidates(p);
  CHECK(count_cwe(cs, "CWE-416") >= 1);
  CHECK(count_cwe(cs, "CWE-415") == 0);
  bool reuse = false;
  for (const auto& c : cs) {
    CHECK(c.key_event().loc.line == 24);
    CHECK(to_string(c.key_event().chain) == "main>use#3");
    for (size_t i : c.events)
      if (c.path->events[i].kind == PathEventKind::Malloc) reuse = c.path->events[i].placement.reuse;
  }
  CHECK(reuse);
}

TEST_CASE("free twice gives a double-free candidate") {
  TypedProgram p = load_program(
      "record Node { val: int; next: Ref(Node); }\n"
      "fn main() { let n: Ref(Node) = alloc(Node); free(n); free(n); }\n");
  auto cs = candidates(p);
  REQUIRE(count_cwe(cs, "CWE-415") == 1);
  CHECK(count_cwe(cs, "CWE-416") == 0);

  std::vector<PathEvent> evs = {ev(PathEventKind::Malloc, 0, "Node", 1), ev(PathEventKind::Free, 0, "Node", 2),
                                ev(PathEventKind::Free, 0, "Node", 3)};
  auto ms = match_model(model("CWE-415"), evs);
  REQUIRE(ms.size() == 1);
  CHECK(ms[0].events == std::vector<size_t>{1, 2});
  CHECK(ms[0].key == 2);
}

TEST_CASE("program without features gives an empty stream") {
  TypedProgram p = load_program("fn main() { let x: int = input(); if (x > 3) { x = x + 1; } }\n");
  auto ps = paths_of(p);
  for (const auto& fp : ps) CHECK(kinds(*fp) == std::vector<PathEventKind>{PathEventKind::End});
  CHECK(candidates(p).empty());
  CHECK(paths_of(load_program("fn main() { }\n")).size() <= 1);
}

TEST_CASE("injection check") {
  auto query_of = [](const std::string& body) {
    TypedProgram p = load_program("fn main() { " + body + " }\n");
    auto ps = paths_of(p);
    REQUIRE(ps.size() == 1);
    for (const auto& e : ps[0]->events)
      if (e.kind == PathEventKind::DbQuery) return e;
    FAIL("no query");
    return PathEvent{};
  };
  SUBCASE("concatenated input") {
    PathEvent q = query_of("db_query(concat(\"SELECT * FROM t WHERE name=\", input_str()));");
    CHECK(sqli_check(q) == std::optional<int>(0));
    TypedProgram p = load_program("fn main() { db_query(concat(\"SELECT * FROM t WHERE name=\", input_str())); }\n");
    CHECK(count_cwe(candidates(p), "CWE-89") == 1);
  }
  SUBCASE("sanitized input") {
    CHECK_FALSE(sqli_check(query_of("db_query(sanitize(input_str()));")).has_value());
    CHECK(candidates(load_program("fn main() { db_query(sanitize(input_str())); }\n")).empty());
  }
  SUBCASE("constant") {
    CHECK_FALSE(sqli_check(query_of("db_query(\"constant\");")).has_value());
    CHECK(candidates(load_program("fn main() { db_query(\"constant\"); }\n")).empty());
  }
  SUBCASE("the unsanitized slot is the input's index") {
    PathEvent q = query_of("let a: str = input_str(); let b: str = input_str(); db_query(concat(sanitize(a), b));");
    CHECK(sqli_check(q) == std::optional<int>(1));
  }
}

TEST_CASE("unrelated heap traffic between the steps never suppresses the candidate") {
  const WeaknessModel& uaf = model("CWE-416");
  // Block 0 is freed, its memory reused by a Msg, and then read as a Node.
  std::vector<PathEvent> core = {ev(PathEventKind::Malloc, 0, "Node", 1), ev(PathEventKind::Free, 0, "Node", 2),
                                 ev(PathEventKind::Malloc, 1, "Msg", 3, sym::Placement::reuse_of(0)),
                                 ev(PathEventKind::Access, 0, "Node", 4)};
  REQUIRE(match_model(uaf, core).size() == 1);

  std::mt19937 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<PathEvent> path;
    std::vector<size_t> core_at;
    sym::BlockId next = 10;
    std::vector<sym::BlockId> live;
    auto noise = [&]() {
      int n = static_cast<int>(rng() % 4);
      for (int i = 0; i < n; ++i) {
        int pick = static_cast<int>(rng() % 3);
        if (pick == 0 || live.empty()) {
          live.push_back(next);
          path.push_back(ev(PathEventKind::Malloc, next++, rng() % 2 ? "Node" : "Msg", 100));
        } else {
          size_t k = rng() % live.size();
          if (pick == 1) {
            path.push_back(ev(PathEventKind::Free, live[k], "Node", 101));
            live.erase(live.begin() + static_cast<long>(k));
          } else {
            path.push_back(ev(PathEventKind::Access, live[k], "Node", 102));
          }
        }
      }
    };
    for (const auto& e : core) {
      noise();
      core_at.push_back(path.size());
      path.push_back(e);
    }
    noise();
    auto ms = match_model(uaf, path);
    bool hit = std::any_of(ms.begin(), ms.end(), [&](const ModelMatch& m) { return m.key == core_at[3]; });
    CHECK_MESSAGE(hit, "trial " << trial);
    for (const auto& m : ms) CHECK(m.key != core_at[0]);
  }
}

TEST_CASE("a machine resets after accepting, so one binding can match again") {
  std::vector<PathEvent> evs = {ev(PathEventKind::Malloc, 0, "Node", 1), ev(PathEventKind::Free, 0, "Node", 2),
                                ev(PathEventKind::Access, 0, "Node", 3), ev(PathEventKind::Free, 0, "Node", 4),
                                ev(PathEventKind::Access, 0, "Node", 5)};
  auto ms = match_model(model("CWE-416"), evs);
  REQUIRE(ms.size() == 2);
  CHECK(ms[0].key == 2);
  CHECK(ms[1].key == 4);
}

TEST_CASE("leak model: a block freed on the path is no leak") {
  const WeaknessModel& leak = model("CWE-401");
  PathEvent end = ev(PathEventKind::End, -1, "", 9);
  CHECK(match_model(leak, {ev(PathEventKind::Malloc, 0, "Node", 1), end}).size() == 1);
  CHECK(match_model(leak, {ev(PathEventKind::Malloc, 0, "Node", 1), ev(PathEventKind::Free, 0, "Node", 2), end}).empty());
  // Paths cut by a fault do not prove a leak.
  CHECK(match_model(leak, {ev(PathEventKind::Malloc, 0, "Node", 1)}).empty());
}

TEST_CASE("model files are validated") {
  nlohmann::json good = {{"name", "m"},
                         {"cwe", "CWE-1"},
                         {"accept", {"b"}},
                         {"transitions", {{{"from", "start"}, {"on", "free"}, {"where", {"subject"}}, {"to", "b"}}}}};
  CHECK_NOTHROW(parse_model(good));
  auto broken = [&](auto mutate) {
    nlohmann::json j = good;
    mutate(j);
    return j;
  };
  CHECK_THROWS(parse_model(broken([](nlohmann::json& j) { j["transitions"][0]["on"] = "jump"; })));
  CHECK_THROWS(parse_model(broken([](nlohmann::json& j) { j["transitions"][0]["where"] = {"nonsense"}; })));
  CHECK_THROWS(parse_model(broken([](nlohmann::json& j) { j["accept"] = nlohmann::json::array(); })));
  CHECK_THROWS(parse_model(broken([](nlohmann::json& j) { j["severity"] = "meh"; })));
  CHECK_THROWS(parse_model(broken([](nlohmann::json& j) { j["fault"] = "Nope"; })));
  CHECK_THROWS(parse_model(broken([](nlohmann::json& j) { j["bind"] = "none"; })));
  CHECK_THROWS(parse_model(broken([](nlohmann::json& j) { j.erase("cwe"); })));

  std::set<std::string> cwes;
  for (const auto& m : models()) cwes.insert(m.cwe);
  for (const char* c : {"CWE-416", "CWE-415", "CWE-401", "CWE-89", "OOB"}) CHECK(cwes.count(c) == 1);
}

TEST_CASE("every seeded weakness of the simple corpus has a candidate") {
  struct Seed {
    const char* stem;
    const char* cwe;
    int line;
  };
  const Seed seeds[] = {{"uaf_basic", "CWE-416", 14},     {"uaf_fig3", "CWE-416", 24},
                        {"uaf_plain", "CWE-416", 15},     {"uaf_guarded_chain", "CWE-416", 21},
                        {"double_free", "CWE-415", 14},   {"double_free_loop", "CWE-415", 9},
                        {"sqli_basic", "CWE-89", 5},      {"sqli_nested", "CWE-89", 10},
                        {"oob_basic", "OOB", 7},          {"oob_loop", "OOB", 6}};
  for (const auto& s : seeds) {
    auto cs = candidates(corpus_program("simple", s.stem));
    bool hit = std::any_of(cs.begin(), cs.end(),
                           [&](const Candidate& c) { return c.model->cwe == s.cwe && c.key_event().loc.line == s.line; });
    CHECK_MESSAGE(hit, s.stem);
  }
  CHECK(candidates(corpus_program("simple", "clean")).empty());
}

TEST_CASE("trace budget cuts paths with a warning") {
  TypedProgram p = corpus_program("simple", "double_free_loop");
  AnalysisConfig cfg;
  cfg.trace_max = 1;
  ProgramSummaries s = summarize_program(p, cfg);
  ConquerResult r = conquer(p, s, models(), cfg);
  CHECK(r.stats.truncated);
  REQUIRE_FALSE(r.stats.warnings.empty());
  CHECK(r.stats.warnings.begin()->rfind("TraceBudgetExceeded", 0) == 0);
}

TEST_CASE("pruning keeps every satisfiable path") {
  for (const char* stem : {"uaf_guarded_chain", "uaf_fig3", "double_free"}) {
    TypedProgram p = corpus_program("simple", stem);
    AnalysisConfig on, off;
    off.prune_infeasible = false;
    auto sig = [](const FeaturePath& fp) {
      std::string s;
      for (const auto& e : fp.events) s += std::string(to_string(e.kind)) + to_string(e.loc) + sym::to_string(e.placement) + ";";
      return s;
    };
    std::set<std::string> pruned, all;
    for (const auto& fp : paths_of(p, on)) pruned.insert(sig(*fp));
    for (const auto& fp : paths_of(p, off)) {
      sym::PathCondition pc = fp->guard;
      for (const auto& [at, b] : fp->bindings) pc.push_back({b, true});
      if (sym::check_sat(pc, on.solver).sat()) all.insert(sig(*fp));
    }
    for (const auto& s : all) CHECK_MESSAGE(pruned.count(s) == 1, stem << ": " << s);
  }
}
