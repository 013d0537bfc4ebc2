#include "shardsym/frontend/parser.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace shardsym {

namespace {

std::string describe_expected(const std::set<std::string>& expected) {
  std::string out;
  for (const auto& e : expected) {
    if (!out.empty()) out += ", ";
    out += e;
  }
  return out;
}

}  // namespace

ParseError::ParseError(SourceLoc loc, std::string found, std::set<std::string> expected)
    : std::runtime_error("parse error at " + to_string(loc) + ": found " + found + ", expected one of {" +
                         describe_expected(expected) + "}"),
      loc_(loc),
      found_(std::move(found)),
      expected_(std::move(expected)) {}

namespace {

enum class Tok { Ident, IntLit, StrLit, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::int64_t value = 0;
  SourceLoc loc;
};

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.loc = {line_, col_};
      if (pos_ >= src_.size()) {
        t.kind = Tok::End;
        t.text = "end of input";
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        t.kind = Tok::Ident;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
          t.text += advance();
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        t.kind = Tok::IntLit;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
          t.text += advance();
          if (t.text.size() > 12) throw ParseError(t.loc, "integer literal " + t.text, {"integer literal <= 2147483647"});
        }
        t.value = std::stoll(t.text);
        if (t.value > 2147483647LL) throw ParseError(t.loc, "integer literal " + t.text, {"integer literal <= 2147483647"});
      } else if (c == '"') {
        t.kind = Tok::StrLit;
        advance();
        for (;;) {
          if (pos_ >= src_.size() || src_[pos_] == '\n')
            throw ParseError({line_, col_}, "unterminated string", {"\""});
          char d = advance();
          if (d == '"') break;
          if (d == '\\') {
            if (pos_ >= src_.size()) throw ParseError({line_, col_}, "unterminated string", {"\""});
            char esc = advance();
            switch (esc) {
              case 'n': t.text += '\n'; break;
              case 't': t.text += '\t'; break;
              case '"': t.text += '"'; break;
              case '\\': t.text += '\\'; break;
              default: throw ParseError({line_, col_ - 1}, std::string("escape \\") + esc, {"\\n", "\\t", "\\\"", "\\\\"});
            }
          } else {
            t.text += d;
          }
        }
      } else {
        t.kind = Tok::Punct;
        static const char* two[] = {"->", "==", "!=", "<=", ">=", "&&", "||"};
        bool matched = false;
        for (const char* p : two) {
          if (src_.substr(pos_, 2) == p) {
            t.text = p;
            advance();
            advance();
            matched = true;
            break;
          }
        }
        if (!matched) {
          static const std::string single = "{}()[];:,=+-*<>!";
          if (single.find(c) == std::string::npos)
            throw ParseError(t.loc, std::string("character '") + c + "'", {"token"});
          t.text = std::string(1, advance());
        }
      }
      out.push_back(std::move(t));
    }
  }

private:
  char advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

const std::set<std::string> kKeywords = {"record", "fn",    "let",   "if",        "else",     "while",
                                         "return", "free",  "int",   "str",       "Ref",      "alloc",
                                         "input",  "input_str", "sanitize", "db_query", "concat"};

class Parser {
public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Program program() {
    Program p;
    while (!at_end()) {
      if (is_word("record")) {
        p.records.push_back(record());
      } else if (is_word("fn")) {
        p.functions.push_back(function());
      } else {
        fail({"record", "fn", "end of input"});
      }
    }
    return p;
  }

private:
  const Token& peek(size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == Tok::End; }
  bool is_word(const char* w) const { return peek().kind == Tok::Ident && peek().text == w; }
  bool is_punct(const char* p, size_t k = 0) const { return peek(k).kind == Tok::Punct && peek(k).text == p; }

  [[noreturn]] void fail(std::set<std::string> expected) const {
    const Token& t = peek();
    std::string found = t.kind == Tok::End ? t.text : "'" + t.text + "'";
    throw ParseError(t.loc, found, std::move(expected));
  }

  Token take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  void expect_punct(const char* p) {
    if (!is_punct(p)) fail({std::string("'") + p + "'"});
    take();
  }

  void expect_word(const char* w) {
    if (!is_word(w)) fail({w});
    take();
  }

  std::string ident() {
    if (peek().kind != Tok::Ident || kKeywords.count(peek().text)) fail({"identifier"});
    return take().text;
  }

  MinType type() {
    if (is_word("int")) {
      take();
      return MinType::Int();
    }
    if (is_word("str")) {
      take();
      return MinType::Str();
    }
    if (is_word("Ref")) {
      take();
      expect_punct("(");
      std::string r = ident();
      expect_punct(")");
      return MinType::Ref(r);
    }
    if (is_punct("[")) {
      take();
      expect_word("int");
      expect_punct(";");
      if (peek().kind != Tok::IntLit) fail({"integer literal"});
      int n = static_cast<int>(take().value);
      expect_punct("]");
      return MinType::Array(n);
    }
    fail({"int", "str", "Ref", "'['"});
  }

  RecordDecl record() {
    RecordDecl r;
    r.loc = peek().loc;
    expect_word("record");
    r.name = ident();
    expect_punct("{");
    while (!is_punct("}")) {
      if (peek().kind != Tok::Ident) fail({"identifier", "'}'"});
      FieldDecl f;
      f.name = ident();
      expect_punct(":");
      f.type = type();
      expect_punct(";");
      r.fields.push_back(std::move(f));
    }
    take();
    return r;
  }

  FunctionDecl function() {
    FunctionDecl f;
    f.loc = peek().loc;
    expect_word("fn");
    f.name = ident();
    expect_punct("(");
    if (!is_punct(")")) {
      for (;;) {
        Param p;
        p.name = ident();
        expect_punct(":");
        p.type = type();
        f.params.push_back(std::move(p));
        if (is_punct(",")) {
          take();
          continue;
        }
        break;
      }
    }
    expect_punct(")");
    if (is_punct("->")) {
      take();
      f.return_type = type();
    }
    f.body = block();
    return f;
  }

  Block block() {
    expect_punct("{");
    Block b;
    while (!is_punct("}")) {
      if (at_end()) fail({"'}'", "statement"});
      b.push_back(statement());
    }
    take();
    return b;
  }

  StmtPtr statement() {
    auto s = std::make_unique<Stmt>();
    s->loc = peek().loc;
    if (is_word("let")) {
      take();
      s->kind = StmtKind::Let;
      s->name = ident();
      expect_punct(":");
      s->decl_type = type();
      expect_punct("=");
      s->value = expr();
      expect_punct(";");
    } else if (is_word("if")) {
      take();
      s->kind = StmtKind::If;
      expect_punct("(");
      s->value = expr();
      expect_punct(")");
      s->then_block = block();
      if (is_word("else")) {
        take();
        s->has_else = true;
        s->else_block = block();
      }
    } else if (is_word("while")) {
      take();
      s->kind = StmtKind::While;
      expect_punct("(");
      s->value = expr();
      expect_punct(")");
      s->then_block = block();
    } else if (is_word("return")) {
      take();
      s->kind = StmtKind::Return;
      if (!is_punct(";")) s->value = expr();
      expect_punct(";");
    } else if (is_word("free")) {
      take();
      s->kind = StmtKind::Free;
      expect_punct("(");
      s->value = expr();
      expect_punct(")");
      expect_punct(";");
    } else {
      ExprPtr e = expr();
      if (is_punct("=")) {
        if (e->kind != ExprKind::Var && e->kind != ExprKind::Field && e->kind != ExprKind::Index)
          throw ParseError(peek().loc, "'='", {"';'"});
        take();
        s->kind = StmtKind::Assign;
        s->target = std::move(e);
        s->value = expr();
      } else {
        s->kind = StmtKind::ExprStmt;
        s->value = std::move(e);
      }
      expect_punct(";");
    }
    return s;
  }

  // Precedence, loosest first: || && (== !=) (< <= > >=) (+ -) * ! postfix
  ExprPtr expr() { return binary(0); }

  static int precedence(const std::string& op) {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "==" || op == "!=") return 3;
    if (op == "<" || op == "<=" || op == ">" || op == ">=") return 4;
    if (op == "+" || op == "-") return 5;
    if (op == "*") return 6;
    return 0;
  }

  static BinOp to_op(const std::string& op) {
    if (op == "+") return BinOp::Add;
    if (op == "-") return BinOp::Sub;
    if (op == "*") return BinOp::Mul;
    if (op == "==") return BinOp::Eq;
    if (op == "!=") return BinOp::Ne;
    if (op == "<") return BinOp::Lt;
    if (op == "<=") return BinOp::Le;
    if (op == ">") return BinOp::Gt;
    if (op == ">=") return BinOp::Ge;
    if (op == "&&") return BinOp::And;
    return BinOp::Or;
  }

  ExprPtr binary(int min_prec) {
    ExprPtr lhs = unary();
    for (;;) {
      if (peek().kind != Tok::Punct) return lhs;
      int prec = precedence(peek().text);
      if (prec == 0 || prec <= min_prec) return lhs;
      Token op = take();
      ExprPtr rhs = binary(prec);
      auto e = std::make_unique<Expr>();
      e->kind = ExprKind::Binary;
      e->loc = op.loc;
      e->op = to_op(op.text);
      e->kids.push_back(std::move(lhs));
      e->kids.push_back(std::move(rhs));
      lhs = std::move(e);
    }
  }

  ExprPtr unary() {
    if (is_punct("!")) {
      auto e = std::make_unique<Expr>();
      e->kind = ExprKind::Not;
      e->loc = take().loc;
      e->kids.push_back(unary());
      return e;
    }
    return postfix();
  }

  ExprPtr postfix() {
    ExprPtr e = primary();
    while (is_punct("->")) {
      SourceLoc loc = take().loc;
      auto f = std::make_unique<Expr>();
      f->kind = ExprKind::Field;
      f->loc = loc;
      f->text = ident();
      f->kids.push_back(std::move(e));
      e = std::move(f);
    }
    return e;
  }

  ExprPtr builtin_unary(ExprKind kind, SourceLoc loc) {
    auto e = std::make_unique<Expr>();
    e->kind = kind;
    e->loc = loc;
    expect_punct("(");
    e->kids.push_back(expr());
    expect_punct(")");
    return e;
  }

  ExprPtr primary() {
    auto e = std::make_unique<Expr>();
    const Token& t = peek();
    e->loc = t.loc;
    if (t.kind == Tok::IntLit) {
      e->kind = ExprKind::IntLit;
      e->int_value = static_cast<std::int32_t>(take().value);
      return e;
    }
    if (t.kind == Tok::StrLit) {
      e->kind = ExprKind::StrLit;
      e->text = take().text;
      return e;
    }
    if (is_punct("(")) {
      take();
      ExprPtr inner = expr();
      expect_punct(")");
      return inner;
    }
    if (t.kind != Tok::Ident) fail({"expression"});
    SourceLoc loc = t.loc;
    if (is_word("alloc")) {
      take();
      e->kind = ExprKind::Alloc;
      expect_punct("(");
      e->text = ident();
      expect_punct(")");
      return e;
    }
    if (is_word("input") || is_word("input_str")) {
      e->kind = take().text == "input" ? ExprKind::Input : ExprKind::InputStr;
      expect_punct("(");
      expect_punct(")");
      return e;
    }
    if (is_word("sanitize")) {
      take();
      return builtin_unary(ExprKind::Sanitize, loc);
    }
    if (is_word("db_query")) {
      take();
      return builtin_unary(ExprKind::DbQuery, loc);
    }
    if (is_word("concat")) {
      take();
      e->kind = ExprKind::Concat;
      expect_punct("(");
      e->kids.push_back(expr());
      expect_punct(",");
      e->kids.push_back(expr());
      expect_punct(")");
      return e;
    }
    std::string name = ident();
    if (is_punct("(")) {
      take();
      e->kind = ExprKind::Call;
      e->text = name;
      if (!is_punct(")")) {
        for (;;) {
          e->kids.push_back(expr());
          if (is_punct(",")) {
            take();
            continue;
          }
          break;
        }
      }
      expect_punct(")");
      return e;
    }
    if (is_punct("[")) {
      take();
      e->kind = ExprKind::Index;
      e->text = name;
      e->kids.push_back(expr());
      expect_punct("]");
      return e;
    }
    e->kind = ExprKind::Var;
    e->text = name;
    return e;
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
};

}  // namespace

Program parse_program(std::string_view source) {
  Lexer lexer(source);
  Parser parser(lexer.run());
  return parser.program();
}

TypedProgram load_program(std::string_view source) {
  auto result = typecheck(parse_program(source));
  if (!result.ok()) {
    std::ostringstream os;
    for (const auto& e : result.errors) os << to_string(e.loc) << ": " << e.message << "\n";
    throw std::runtime_error("type errors:\n" + os.str());
  }
  return std::move(*result.program);
}

TypedProgram load_program_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_program(ss.str());
}

}  // namespace shardsym
