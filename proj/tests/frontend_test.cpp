#include <doctest.h>

#include <algorithm>

#include "shardsym/frontend/parser.hpp"

using namespace shardsym;

namespace {

std::vector<std::string> type_errors(const std::string& src) {
  auto result = typecheck(parse_program(src));
  std::vector<std::string> out;
  for (const auto& e : result.errors) out.push_back(e.message);
  return out;
}

bool mentions(const std::vector<std::string>& errors, const std::string& needle) {
  return std::any_of(errors.begin(), errors.end(), [&](const auto& e) { return e.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("minimal program parses") {
  Program p = parse_program("fn main() { let x: int = 1; }");
  CHECK(p.records.empty());
  REQUIRE(p.functions.size() == 1);
  CHECK(p.functions[0].name == "main");
  CHECK(p.functions[0].body.size() == 1);
  CHECK(typecheck(std::move(p)).ok());
}

TEST_CASE("two-parameter branching function") {
  Program p = parse_program("fn f(x: int, y: int) -> int { if (x > 10) { return y; } else { return x; } }");
  REQUIRE(p.functions.size() == 1);
  const FunctionDecl& f = p.functions[0];
  CHECK(f.name == "f");
  REQUIRE(f.params.size() == 2);
  CHECK(f.params[0].type == MinType::Int());
  CHECK(f.params[1].type == MinType::Int());
  CHECK(f.return_type == MinType::Int());
}

TEST_CASE("malformed input reports position and expected tokens") {
  try {
    parse_program("fn f( {");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.loc().line == 1);
    CHECK(e.loc().col == 7);
    CHECK(e.expected().count("identifier") == 1);
  }
  CHECK_THROWS_AS(parse_program("fn main() { let x: int = ; }"), ParseError);
  CHECK_THROWS_AS(parse_program("fn main() { 1 + 2 = 3; }"), ParseError);
  CHECK_THROWS_AS(parse_program("fn main() { let s: str = \"abc; }"), ParseError);
}

TEST_CASE("comments and precedence") {
  Program p = parse_program(
      "// leading comment\n"
      "fn main() -> int { return 1 + 2 * 3 < 4 && 5 == 5 || !0; } // trailing\n");
  const Stmt& ret = *p.functions[0].body[0];
  CHECK(pretty_print(*ret.value) == "((((1 + (2 * 3)) < 4) && (5 == 5)) || !0)");
}

TEST_CASE("alloc to matching reference type checks") {
  auto errors = type_errors(
      "record Node { v: int; next: Ref(Node); }\n"
      "fn main() { let n: Ref(Node) = alloc(Node); n->v = 3; n->next = n; free(n); }");
  CHECK(errors.empty());
}

TEST_CASE("free of a non-reference is rejected") {
  auto errors = type_errors("fn main() { free(5); }");
  REQUIRE(errors.size() == 1);
  CHECK(errors[0] == "free requires a reference");
}

TEST_CASE("every builtin signature mismatch is rejected") {
  // One program per argument position of each builtin with a wrongly typed operand.
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"db_query(input());", "db_query requires str"},
      {"sanitize(input());", "sanitize requires str"},
      {"concat(input(), \"a\");", "concat requires str"},
      {"concat(\"a\", 1);", "concat requires str"},
      {"let r: Ref(Node) = alloc(Node); free(r->v);", "free requires a reference"},
      {"let x: int = input_str();", "expected int, found str"},
      {"let s: str = input();", "expected str, found int"},
      {"let s: str = db_query(\"q\");", "expected str, found int"},
      {"let r: Ref(Node) = alloc(Other);", "unknown record Other"},
      {"let x: int = alloc(Node);", "expected int, found Ref(Node)"},
  };
  for (const auto& [body, message] : cases) {
    CAPTURE(body);
    auto errors = type_errors("record Node { v: int; }\nfn main() { " + body + " }");
    CHECK(mentions(errors, message));
  }
}

TEST_CASE("type errors are all collected") {
  auto errors = type_errors(
      "fn g(a: int) -> int { return a; }\n"
      "fn h() { }\n"
      "fn main() { let x: int = g(1, 2); let y: int = h(); db_query(3); let z: int = w; }");
  CHECK(errors.size() >= 4);
  CHECK(mentions(errors, "expects 1 arguments"));
  CHECK(mentions(errors, "void function h used as a value"));
  CHECK(mentions(errors, "db_query requires str"));
  CHECK(mentions(errors, "unknown variable w"));
}

TEST_CASE("program-level invariants") {
  CHECK(mentions(type_errors("fn f() { }"), "no function main"));
  CHECK(mentions(type_errors("fn main(x: int) { }"), "main must not take parameters"));
  CHECK(mentions(type_errors("fn main() { } fn main() { }"), "duplicate function"));
  CHECK(mentions(type_errors("record A { x: int; x: str; } fn main() { }"), "duplicate field"));
  CHECK(mentions(type_errors("record A { n: Ref(B); } fn main() { }"), "unknown record B"));
  CHECK(mentions(type_errors("fn f(x: int) -> int { if (x) { return 1; } } fn main() { }"), "without returning"));
  CHECK(mentions(type_errors("fn main() { let a: [int; 0] = 0; }"), "array length"));
  CHECK(type_errors("record L { next: Ref(L); } fn main() { }").empty());
}

TEST_CASE("sites are numbered per function in source order") {
  auto r = typecheck(parse_program(
      "record N { v: int; }\n"
      "fn g(x: int) -> int { return x; }\n"
      "fn f() -> int { let a: Ref(N) = alloc(N); let b: Ref(N) = alloc(N); return g(1) + g(2); }\n"
      "fn main() { f(); }"));
  REQUIRE(r.ok());
  const FunctionDecl& f = r.program->function("f");
  CHECK(f.call_sites == 2);
  CHECK(f.alloc_sites == 2);
  CHECK(r.program->function("main").call_sites == 1);
}

TEST_CASE("size_of follows the size table") {
  Program p = parse_program("record R { a: int; b: Ref(T); } record T { c: [int; 10]; s: str; } fn main() { }");
  CHECK(size_of(MinType::Int()) == 4);
  CHECK(size_of(MinType::Str()) == 8);
  CHECK(size_of(MinType::Ref("T")) == 8);
  CHECK(size_of(MinType::Array(10)) == 40);
  CHECK(size_of_record(p, "R") == 12);
  CHECK(size_of_record(p, "T") == 48);
}

TEST_CASE("pretty-print round trip") {
  const char* src =
      "record Node { key: int; left: Ref(Node); buf: [int; 4]; name: str; }\n"
      "fn f(x: int, n: Ref(Node)) -> int {\n"
      "  let a: [int; 4] = 0;\n"
      "  a[x - 1] = n->left->key;\n"
      "  while (x < 10 && !(x == 3)) { x = x + 1; }\n"
      "  if (x >= 2) { free(n); } else { n->name = concat(\"a\\\"b\", sanitize(input_str())); }\n"
      "  return db_query(n->name);\n"
      "}\n"
      "fn main() { let n: Ref(Node) = alloc(Node); f(input(), n); return; }\n";
  Program p = parse_program(src);
  std::string printed = pretty_print(p);
  Program again = parse_program(printed);
  CHECK(same_structure(p, again));
  CHECK(pretty_print(again) == printed);
}
