#include <map>
#include <set>
#include <stdexcept>

#include "shardsym/frontend/parser.hpp"

namespace shardsym {

const FunctionDecl& TypedProgram::function(const std::string& name) const {
  const FunctionDecl* f = program_->function(name);
  if (!f) throw std::out_of_range("unknown function " + name);
  return *f;
}

const RecordDecl& TypedProgram::record(const std::string& name) const {
  const RecordDecl* r = program_->record(name);
  if (!r) throw std::out_of_range("unknown record " + name);
  return *r;
}

namespace {

class Checker {
public:
  explicit Checker(Program& p) : prog_(p) {}

  std::vector<TypeError> run() {
    check_declarations();
    for (auto& f : prog_.functions) check_function(f);
    return std::move(errors_);
  }

private:
  void error(SourceLoc loc, std::string msg) { errors_.push_back({loc, std::move(msg)}); }

  bool well_formed(const MinType& t, SourceLoc loc, bool allow_void) {
    switch (t.kind) {
      case MinType::Kind::Ref:
        if (!prog_.record(t.record)) {
          error(loc, "unknown record " + t.record);
          return false;
        }
        return true;
      case MinType::Kind::Array:
        if (t.length < 1) {
          error(loc, "array length must be at least 1");
          return false;
        }
        return true;
      case MinType::Kind::Void:
        if (!allow_void) error(loc, "void is not a value type");
        return allow_void;
      default:
        return true;
    }
  }

  void check_declarations() {
    std::set<std::string> records;
    for (const auto& r : prog_.records) {
      if (!records.insert(r.name).second) error(r.loc, "duplicate record " + r.name);
      std::set<std::string> fields;
      for (const auto& f : r.fields) {
        if (!fields.insert(f.name).second) error(r.loc, "duplicate field " + f.name + " in record " + r.name);
        well_formed(f.type, r.loc, false);
        if (f.type.is_array()) error(r.loc, "field " + f.name + ": arrays are local values only");
      }
    }
    std::set<std::string> fns;
    for (const auto& f : prog_.functions) {
      if (!fns.insert(f.name).second) error(f.loc, "duplicate function " + f.name);
      for (const auto& p : f.params) {
        well_formed(p.type, f.loc, false);
        if (p.type.is_array()) error(f.loc, "parameter " + p.name + ": arrays are local values only");
      }
      well_formed(f.return_type, f.loc, true);
      if (f.return_type.is_array()) error(f.loc, "function " + f.name + ": arrays are local values only");
    }
    const FunctionDecl* main = prog_.function(prog_.entry);
    if (!main) {
      error({1, 1}, "program has no function main");
    } else if (!main->params.empty()) {
      error(main->loc, "main must not take parameters");
    }
  }

  void check_function(FunctionDecl& f) {
    fn_ = &f;
    declared_.clear();
    scopes_.clear();
    call_sites_ = 0;
    alloc_sites_ = 0;
    scopes_.emplace_back();
    for (const auto& p : f.params) declare(p.name, p.type, f.loc);
    check_block(f.body);
    scopes_.clear();
    f.call_sites = call_sites_;
    f.alloc_sites = alloc_sites_;
    if (!f.return_type.is_void() && !always_returns(f.body))
      error(f.loc, "function " + f.name + " may reach its end without returning a value");
  }

  static bool always_returns(const Block& b) {
    for (const auto& s : b) {
      if (s->kind == StmtKind::Return) return true;
      if (s->kind == StmtKind::If && s->has_else && always_returns(s->then_block) && always_returns(s->else_block))
        return true;
    }
    return false;
  }

  // Variable names are unique per function, so the executors can use a flat environment.
  void declare(const std::string& name, const MinType& t, SourceLoc loc) {
    if (!declared_.insert(name).second) {
      error(loc, "variable " + name + " already declared in function " + fn_->name);
      return;
    }
    scopes_.back()[name] = t;
  }

  const MinType* lookup(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto found = it->find(name);
      if (found != it->end()) return &found->second;
    }
    return nullptr;
  }

  void check_block(Block& b) {
    scopes_.emplace_back();
    for (auto& s : b) check_stmt(*s);
    scopes_.pop_back();
  }

  void require(const MinType& got, const MinType& want, SourceLoc loc, const std::string& what) {
    if (got.is_void() && want.is_void()) return;
    if (!(got == want)) error(loc, what + ": expected " + to_string(want) + ", found " + to_string(got));
  }

  void check_stmt(Stmt& s) {
    switch (s.kind) {
      case StmtKind::Let: {
        well_formed(s.decl_type, s.loc, false);
        MinType t = check_expr(*s.value);
        if (!known(t)) {
        } else if (s.decl_type.is_array()) {
          if (!t.is_int() && !(t == s.decl_type))
            error(s.loc, "array initializer must be an int fill value or an array of the same type");
        } else {
          require(t, s.decl_type, s.loc, "initializer of " + s.name);
        }
        declare(s.name, s.decl_type, s.loc);
        break;
      }
      case StmtKind::Assign: {
        MinType lhs = check_expr(*s.target);
        MinType rhs = check_expr(*s.value);
        if (known(lhs) && known(rhs)) require(rhs, lhs, s.loc, "assignment");
        break;
      }
      case StmtKind::If:
        condition(*s.value);
        check_block(s.then_block);
        if (s.has_else) check_block(s.else_block);
        break;
      case StmtKind::While:
        condition(*s.value);
        check_block(s.then_block);
        break;
      case StmtKind::Return: {
        if (!s.value) {
          if (!fn_->return_type.is_void()) error(s.loc, "return without a value in non-void function " + fn_->name);
          break;
        }
        MinType t = check_expr(*s.value);
        if (fn_->return_type.is_void())
          error(s.loc, "return with a value in void function " + fn_->name);
        else if (known(t))
          require(t, fn_->return_type, s.loc, "return value");
        break;
      }
      case StmtKind::Free: {
        MinType t = check_expr(*s.value);
        if (known(t) && !t.is_ref()) error(s.loc, "free requires a reference");
        break;
      }
      case StmtKind::ExprStmt:
        statement_call_ = s.value.get();
        check_expr(*s.value);
        break;
    }
  }

  void condition(Expr& e) {
    MinType t = check_expr(e);
    if (known(t) && !t.is_int()) error(e.loc, "condition must be int, found " + to_string(t));
  }

  // Void doubles as the "already reported" marker for ill-typed subexpressions.
  static bool known(const MinType& t) { return !t.is_void(); }

  MinType check_expr(Expr& e) {
    e.type = infer(e);
    return e.type;
  }

  MinType infer(Expr& e) {
    switch (e.kind) {
      case ExprKind::IntLit: return MinType::Int();
      case ExprKind::StrLit: return MinType::Str();
      case ExprKind::Var: {
        const MinType* t = lookup(e.text);
        if (!t) {
          error(e.loc, "unknown variable " + e.text);
          return MinType::Void();
        }
        return *t;
      }
      case ExprKind::Field: {
        MinType base = check_expr(*e.kids[0]);
        if (!known(base)) return base;
        if (!base.is_ref()) {
          error(e.loc, "field access requires a reference, found " + to_string(base));
          return MinType::Void();
        }
        const RecordDecl* r = prog_.record(base.record);
        const FieldDecl* f = r ? r->field(e.text) : nullptr;
        if (!f) {
          error(e.loc, "record " + base.record + " has no field " + e.text);
          return MinType::Void();
        }
        return f->type;
      }
      case ExprKind::Index: {
        const MinType* t = lookup(e.text);
        MinType idx = check_expr(*e.kids[0]);
        if (known(idx) && !idx.is_int()) error(e.loc, "array index must be int");
        if (!t) {
          error(e.loc, "unknown variable " + e.text);
          return MinType::Void();
        }
        if (!t->is_array()) {
          error(e.loc, "indexing requires an array, found " + to_string(*t));
          return MinType::Void();
        }
        return MinType::Int();
      }
      case ExprKind::Binary: {
        MinType l = check_expr(*e.kids[0]);
        MinType r = check_expr(*e.kids[1]);
        if (known(l) && !l.is_int()) error(e.kids[0]->loc, std::string("operator ") + to_string(e.op) + " requires int operands");
        if (known(r) && !r.is_int()) error(e.kids[1]->loc, std::string("operator ") + to_string(e.op) + " requires int operands");
        return MinType::Int();
      }
      case ExprKind::Not: {
        MinType t = check_expr(*e.kids[0]);
        if (known(t) && !t.is_int()) error(e.loc, "operator ! requires an int operand");
        return MinType::Int();
      }
      case ExprKind::Call: {
        e.site = call_sites_++;
        const FunctionDecl* callee = prog_.function(e.text);
        std::vector<MinType> args;
        for (auto& k : e.kids) args.push_back(check_expr(*k));
        if (!callee) {
          error(e.loc, "unknown function " + e.text);
          return MinType::Void();
        }
        if (callee->name == prog_.entry) error(e.loc, "main cannot be called");
        if (args.size() != callee->params.size()) {
          error(e.loc, "function " + e.text + " expects " + std::to_string(callee->params.size()) + " arguments, got " +
                           std::to_string(args.size()));
        } else {
          for (size_t i = 0; i < args.size(); ++i)
            if (known(args[i])) require(args[i], callee->params[i].type, e.kids[i]->loc, "argument " + std::to_string(i + 1) + " of " + e.text);
        }
        if (callee->return_type.is_void() && statement_call_ != &e) {
          error(e.loc, "void function " + e.text + " used as a value");
        }
        return callee->return_type;
      }
      case ExprKind::Alloc:
        e.site = alloc_sites_++;
        if (!prog_.record(e.text)) {
          error(e.loc, "unknown record " + e.text);
          return MinType::Void();
        }
        return MinType::Ref(e.text);
      case ExprKind::Input: return MinType::Int();
      case ExprKind::InputStr: return MinType::Str();
      case ExprKind::Sanitize: {
        MinType t = check_expr(*e.kids[0]);
        if (known(t) && !t.is_str()) error(e.loc, "sanitize requires str, found " + to_string(t));
        return MinType::Str();
      }
      case ExprKind::DbQuery: {
        MinType t = check_expr(*e.kids[0]);
        if (known(t) && !t.is_str()) error(e.loc, "db_query requires str, found " + to_string(t));
        return MinType::Int();
      }
      case ExprKind::Concat: {
        for (auto& k : e.kids) {
          MinType t = check_expr(*k);
          if (known(t) && !t.is_str()) error(k->loc, "concat requires str operands, found " + to_string(t));
        }
        return MinType::Str();
      }
    }
    return MinType::Void();
  }

  Program& prog_;
  const FunctionDecl* fn_ = nullptr;
  std::vector<std::map<std::string, MinType>> scopes_;
  std::set<std::string> declared_;
  std::vector<TypeError> errors_;
  int call_sites_ = 0;
  int alloc_sites_ = 0;
  const Expr* statement_call_ = nullptr;
};

}  // namespace

TypecheckResult typecheck(Program p) {
  Checker checker(p);
  TypecheckResult result;
  result.errors = checker.run();
  if (result.errors.empty()) result.program.emplace(std::move(p));
  return result;
}

}  // namespace shardsym
