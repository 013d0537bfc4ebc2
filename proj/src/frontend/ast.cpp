#include "shardsym/frontend/ast.hpp"

#include <sstream>

namespace shardsym {

std::string to_string(const SourceLoc& loc) {
  return std::to_string(loc.line) + ":" + std::to_string(loc.col);
}

std::string to_string(const MinType& t) {
  switch (t.kind) {
    case MinType::Kind::Int: return "int";
    case MinType::Kind::Str: return "str";
    case MinType::Kind::Ref: return "Ref(" + t.record + ")";
    case MinType::Kind::Array: return "[int; " + std::to_string(t.length) + "]";
    case MinType::Kind::Void: return "void";
  }
  return "?";
}

const char* to_string(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
  }
  return "?";
}

ExprPtr Expr::clone() const {
  auto e = std::make_unique<Expr>();
  e->kind = kind;
  e->loc = loc;
  e->int_value = int_value;
  e->text = text;
  e->op = op;
  e->type = type;
  e->site = site;
  for (const auto& k : kids) e->kids.push_back(k->clone());
  return e;
}

const FieldDecl* RecordDecl::field(const std::string& n) const {
  for (const auto& f : fields)
    if (f.name == n) return &f;
  return nullptr;
}

const RecordDecl* Program::record(const std::string& n) const {
  for (const auto& r : records)
    if (r.name == n) return &r;
  return nullptr;
}

const FunctionDecl* Program::function(const std::string& n) const {
  for (const auto& f : functions)
    if (f.name == n) return &f;
  return nullptr;
}

int size_of(const MinType& t) {
  switch (t.kind) {
    case MinType::Kind::Int: return 4;
    case MinType::Kind::Str: return 8;
    case MinType::Kind::Ref: return 8;
    case MinType::Kind::Array: return 4 * t.length;
    case MinType::Kind::Void: return 0;
  }
  return 0;
}

int size_of(const RecordDecl& r) {
  int total = 0;
  for (const auto& f : r.fields) total += size_of(f.type);
  return total;
}

int size_of_record(const Program& p, const std::string& record) {
  const RecordDecl* r = p.record(record);
  return r ? size_of(*r) : 0;
}

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

void print_expr(std::ostream& os, const Expr& e) {
  switch (e.kind) {
    case ExprKind::IntLit: os << e.int_value; break;
    case ExprKind::StrLit: os << quote(e.text); break;
    case ExprKind::Var: os << e.text; break;
    case ExprKind::Field:
      print_expr(os, *e.kids[0]);
      os << "->" << e.text;
      break;
    case ExprKind::Index:
      os << e.text << "[";
      print_expr(os, *e.kids[0]);
      os << "]";
      break;
    case ExprKind::Binary:
      os << "(";
      print_expr(os, *e.kids[0]);
      os << " " << to_string(e.op) << " ";
      print_expr(os, *e.kids[1]);
      os << ")";
      break;
    case ExprKind::Not:
      os << "!";
      print_expr(os, *e.kids[0]);
      break;
    case ExprKind::Call:
      os << e.text << "(";
      for (size_t i = 0; i < e.kids.size(); ++i) {
        if (i) os << ", ";
        print_expr(os, *e.kids[i]);
      }
      os << ")";
      break;
    case ExprKind::Alloc: os << "alloc(" << e.text << ")"; break;
    case ExprKind::Input: os << "input()"; break;
    case ExprKind::InputStr: os << "input_str()"; break;
    case ExprKind::Sanitize:
      os << "sanitize(";
      print_expr(os, *e.kids[0]);
      os << ")";
      break;
    case ExprKind::DbQuery:
      os << "db_query(";
      print_expr(os, *e.kids[0]);
      os << ")";
      break;
    case ExprKind::Concat:
      os << "concat(";
      print_expr(os, *e.kids[0]);
      os << ", ";
      print_expr(os, *e.kids[1]);
      os << ")";
      break;
  }
}

void print_block(std::ostream& os, const Block& b, int indent);

void print_stmt(std::ostream& os, const Stmt& s, int indent) {
  std::string pad(indent * 2, ' ');
  os << pad;
  switch (s.kind) {
    case StmtKind::Let:
      os << "let " << s.name << ": " << to_string(s.decl_type) << " = ";
      print_expr(os, *s.value);
      os << ";\n";
      break;
    case StmtKind::Assign:
      print_expr(os, *s.target);
      os << " = ";
      print_expr(os, *s.value);
      os << ";\n";
      break;
    case StmtKind::If:
      os << "if (";
      print_expr(os, *s.value);
      os << ") ";
      print_block(os, s.then_block, indent);
      if (s.has_else) {
        os << " else ";
        print_block(os, s.else_block, indent);
      }
      os << "\n";
      break;
    case StmtKind::While:
      os << "while (";
      print_expr(os, *s.value);
      os << ") ";
      print_block(os, s.then_block, indent);
      os << "\n";
      break;
    case StmtKind::Return:
      os << "return";
      if (s.value) {
        os << " ";
        print_expr(os, *s.value);
      }
      os << ";\n";
      break;
    case StmtKind::Free:
      os << "free(";
      print_expr(os, *s.value);
      os << ");\n";
      break;
    case StmtKind::ExprStmt:
      print_expr(os, *s.value);
      os << ";\n";
      break;
  }
}

void print_block(std::ostream& os, const Block& b, int indent) {
  os << "{\n";
  for (const auto& s : b) print_stmt(os, *s, indent + 1);
  os << std::string(indent * 2, ' ') << "}";
}

bool same_expr(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.int_value != b.int_value || a.text != b.text || a.kids.size() != b.kids.size())
    return false;
  if (a.kind == ExprKind::Binary && a.op != b.op) return false;
  for (size_t i = 0; i < a.kids.size(); ++i)
    if (!same_expr(*a.kids[i], *b.kids[i])) return false;
  return true;
}

bool same_block(const Block& a, const Block& b);

bool same_opt_expr(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return same_expr(*a, *b);
}

bool same_stmt(const Stmt& a, const Stmt& b) {
  return a.kind == b.kind && a.name == b.name && a.decl_type == b.decl_type && a.has_else == b.has_else &&
         same_opt_expr(a.target, b.target) && same_opt_expr(a.value, b.value) &&
         same_block(a.then_block, b.then_block) && same_block(a.else_block, b.else_block);
}

bool same_block(const Block& a, const Block& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!same_stmt(*a[i], *b[i])) return false;
  return true;
}

}  // namespace

std::string pretty_print(const Expr& e) {
  std::ostringstream os;
  print_expr(os, e);
  return os.str();
}

std::string statement_text(const Stmt& s) {
  std::ostringstream os;
  switch (s.kind) {
    case StmtKind::If:
      os << "if (" << pretty_print(*s.value) << ")";
      return os.str();
    case StmtKind::While:
      os << "while (" << pretty_print(*s.value) << ")";
      return os.str();
    default:
      print_stmt(os, s, 0);
  }
  std::string text = os.str();
  if (!text.empty() && text.back() == '\n') text.pop_back();
  return text;
}

std::string pretty_print(const Program& p) {
  std::ostringstream os;
  for (const auto& r : p.records) {
    os << "record " << r.name << " {\n";
    for (const auto& f : r.fields) os << "  " << f.name << ": " << to_string(f.type) << ";\n";
    os << "}\n\n";
  }
  for (const auto& f : p.functions) {
    os << "fn " << f.name << "(";
    for (size_t i = 0; i < f.params.size(); ++i) {
      if (i) os << ", ";
      os << f.params[i].name << ": " << to_string(f.params[i].type);
    }
    os << ")";
    if (!f.return_type.is_void()) os << " -> " << to_string(f.return_type);
    os << " ";
    print_block(os, f.body, 0);
    os << "\n\n";
  }
  return os.str();
}

bool same_structure(const Program& a, const Program& b) {
  if (a.records.size() != b.records.size() || a.functions.size() != b.functions.size()) return false;
  for (size_t i = 0; i < a.records.size(); ++i) {
    const auto& ra = a.records[i];
    const auto& rb = b.records[i];
    if (ra.name != rb.name || ra.fields.size() != rb.fields.size()) return false;
    for (size_t j = 0; j < ra.fields.size(); ++j)
      if (ra.fields[j].name != rb.fields[j].name || !(ra.fields[j].type == rb.fields[j].type)) return false;
  }
  for (size_t i = 0; i < a.functions.size(); ++i) {
    const auto& fa = a.functions[i];
    const auto& fb = b.functions[i];
    if (fa.name != fb.name || !(fa.return_type == fb.return_type) || fa.params.size() != fb.params.size())
      return false;
    for (size_t j = 0; j < fa.params.size(); ++j)
      if (fa.params[j].name != fb.params[j].name || !(fa.params[j].type == fb.params[j].type)) return false;
    if (!same_block(fa.body, fb.body)) return false;
  }
  return true;
}

}  // namespace shardsym
