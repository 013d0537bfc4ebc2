#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace shardsym {

struct SourceLoc {
  int line = 0;
  int col = 0;
  bool operator==(const SourceLoc&) const = default;
};

std::string to_string(const SourceLoc& loc);

/// MinC types. Record values only exist on the heap, so a record is always
/// reached through `Ref(R)`.
struct MinType {
  enum class Kind { Int, Str, Ref, Array, Void };

  Kind kind = Kind::Void;
  std::string record;   // Ref only
  int length = 0;       // Array only

  static MinType Int() { return {Kind::Int, {}, 0}; }
  static MinType Str() { return {Kind::Str, {}, 0}; }
  static MinType Void() { return {Kind::Void, {}, 0}; }
  static MinType Ref(std::string r) { return {Kind::Ref, std::move(r), 0}; }
  static MinType Array(int n) { return {Kind::Array, {}, n}; }

  bool is_int() const { return kind == Kind::Int; }
  bool is_str() const { return kind == Kind::Str; }
  bool is_ref() const { return kind == Kind::Ref; }
  bool is_array() const { return kind == Kind::Array; }
  bool is_void() const { return kind == Kind::Void; }

  bool operator==(const MinType&) const = default;
};

std::string to_string(const MinType& t);

enum class BinOp { Add, Sub, Mul, Eq, Ne, Lt, Le, Gt, Ge, And, Or };

const char* to_string(BinOp op);

enum class ExprKind {
  IntLit,
  StrLit,
  Var,
  Field,     // kids[0] -> name
  Index,     // name[kids[0]]
  Binary,    // kids[0] op kids[1]
  Not,       // !kids[0]
  Call,      // name(kids...)
  Alloc,     // alloc(name)
  Input,
  InputStr,
  Sanitize,
  DbQuery,
  Concat,
};

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
  ExprKind kind = ExprKind::IntLit;
  SourceLoc loc;
  std::int32_t int_value = 0;
  std::string text;   // string literal contents, identifier, callee, record or field name
  BinOp op = BinOp::Add;
  std::vector<ExprPtr> kids;

  // Filled by typecheck.
  MinType type;
  int site = -1;   // call-site id (Call) or alloc-site id (Alloc), numbered per function

  ExprPtr clone() const;
};

enum class StmtKind { Let, Assign, If, While, Return, Free, ExprStmt };

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;
using Block = std::vector<StmtPtr>;

struct Stmt {
  StmtKind kind = StmtKind::ExprStmt;
  SourceLoc loc;
  std::string name;       // Let
  MinType decl_type;      // Let
  ExprPtr target;         // Assign lvalue
  ExprPtr value;          // Let/Assign rhs, If/While condition, Return value, Free operand, ExprStmt
  Block then_block;       // If then / While body
  Block else_block;
  bool has_else = false;
};

struct Param {
  std::string name;
  MinType type;
};

struct FieldDecl {
  std::string name;
  MinType type;
};

struct RecordDecl {
  std::string name;
  SourceLoc loc;
  std::vector<FieldDecl> fields;

  const FieldDecl* field(const std::string& n) const;
};

struct FunctionDecl {
  std::string name;
  SourceLoc loc;
  std::vector<Param> params;
  MinType return_type = MinType::Void();
  Block body;

  // Filled by typecheck.
  int call_sites = 0;
  int alloc_sites = 0;
};

struct Program {
  std::vector<RecordDecl> records;
  std::vector<FunctionDecl> functions;
  std::string entry = "main";

  const RecordDecl* record(const std::string& n) const;
  const FunctionDecl* function(const std::string& n) const;
};

/// Byte size of a type: int 4, str 8, Ref 8, [int; n] 4n.
int size_of(const MinType& t);
/// Size of a record value: the sum of its field sizes.
int size_of(const RecordDecl& r);
int size_of_record(const Program& p, const std::string& record);

/// Prints the program back to MinC source; binary expressions are fully
/// parenthesized so the output reparses to the same tree.
std::string pretty_print(const Program& p);
std::string pretty_print(const Expr& e);
/// One-line rendering of a statement header (used for CFG labels).
std::string statement_text(const Stmt& s);

/// Structural equality over syntax (ignores locations and typecheck annotations).
bool same_structure(const Program& a, const Program& b);

}  // namespace shardsym
