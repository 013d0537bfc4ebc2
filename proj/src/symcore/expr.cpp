#include "shardsym/symcore/expr.hpp"

#include <sstream>

namespace shardsym::sym {

std::int32_t wrap_add(std::int32_t a, std::int32_t b) {
  return static_cast<std::int32_t>(static_cast<std::uint32_t>(a) + static_cast<std::uint32_t>(b));
}

std::int32_t wrap_sub(std::int32_t a, std::int32_t b) {
  return static_cast<std::int32_t>(static_cast<std::uint32_t>(a) - static_cast<std::uint32_t>(b));
}

std::int32_t wrap_mul(std::int32_t a, std::int32_t b) {
  return static_cast<std::int32_t>(static_cast<std::uint32_t>(a) * static_cast<std::uint32_t>(b));
}

std::int32_t apply_binop(BinOp op, std::int32_t a, std::int32_t b) {
  switch (op) {
    case BinOp::Add: return wrap_add(a, b);
    case BinOp::Sub: return wrap_sub(a, b);
    case BinOp::Mul: return wrap_mul(a, b);
    case BinOp::Eq: return a == b;
    case BinOp::Ne: return a != b;
    case BinOp::Lt: return a < b;
    case BinOp::Le: return a <= b;
    case BinOp::Gt: return a > b;
    case BinOp::Ge: return a >= b;
    case BinOp::And: return a != 0 && b != 0;
    case BinOp::Or: return a != 0 || b != 0;
  }
  return 0;
}

std::string to_string(const VarKey& v) {
  switch (v.kind) {
    case VarKey::Kind::Input: return "in" + std::to_string(v.index);
    case VarKey::Kind::Param: return v.name;
    case VarKey::Kind::Unconstrained: return "?" + v.name;
  }
  return "?";
}

namespace {

std::size_t mix(std::size_t h, std::size_t v) { return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)); }

std::size_t var_hash(const VarKey& k) {
  return mix(mix(static_cast<std::size_t>(k.kind), static_cast<std::size_t>(k.index)), std::hash<std::string>{}(k.name));
}

Sym make(SymNode n) {
  std::size_t h = static_cast<std::size_t>(n.kind) * 31;
  switch (n.kind) {
    case SymKind::Const: h = mix(h, static_cast<std::uint32_t>(n.value)); break;
    case SymKind::Var: h = mix(h, var_hash(n.var)); break;
    case SymKind::Binary: h = mix(mix(mix(h, static_cast<std::size_t>(n.op)), n.lhs->hash), n.rhs->hash); break;
    case SymKind::Not: h = mix(h, n.lhs->hash); break;
  }
  n.hash = h;
  return std::make_shared<const SymNode>(std::move(n));
}

bool is_bool_valued(const Sym& s) {
  if (s->kind == SymKind::Not) return true;
  if (s->kind == SymKind::Const) return s->value == 0 || s->value == 1;
  if (s->kind != SymKind::Binary) return false;
  switch (s->op) {
    case BinOp::Add:
    case BinOp::Sub:
    case BinOp::Mul: return false;
    default: return true;
  }
}

}  // namespace

Sym constant(std::int32_t v) {
  static const Sym zero = make({SymKind::Const, 0, {}, BinOp::Add, nullptr, nullptr, 0});
  static const Sym one = make({SymKind::Const, 1, {}, BinOp::Add, nullptr, nullptr, 0});
  if (v == 0) return zero;
  if (v == 1) return one;
  return make({SymKind::Const, v, {}, BinOp::Add, nullptr, nullptr, 0});
}

Sym truth() { return constant(1); }
Sym falsity() { return constant(0); }

Sym var(VarKey k) { return make({SymKind::Var, 0, std::move(k), BinOp::Add, nullptr, nullptr, 0}); }
Sym input_var(int k) { return var(VarKey::input(k)); }
Sym param_var(const std::string& name) { return var(VarKey::param(name)); }
Sym unconstrained(const std::string& key) { return var(VarKey::unconstrained(key)); }

bool is_const(const Sym& s) { return s->kind == SymKind::Const; }

std::optional<std::int32_t> const_value(const Sym& s) {
  if (s->kind == SymKind::Const) return s->value;
  return std::nullopt;
}

bool equal(const Sym& a, const Sym& b) {
  if (a == b) return true;
  if (a->hash != b->hash || a->kind != b->kind) return false;
  switch (a->kind) {
    case SymKind::Const: return a->value == b->value;
    case SymKind::Var: return a->var == b->var;
    case SymKind::Binary: return a->op == b->op && equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
    case SymKind::Not: return equal(a->lhs, b->lhs);
  }
  return false;
}

Sym binary(BinOp op, Sym a, Sym b) {
  auto ca = const_value(a);
  auto cb = const_value(b);
  if (ca && cb) return constant(apply_binop(op, *ca, *cb));
  switch (op) {
    case BinOp::Add:
      if (ca && *ca == 0) return b;
      if (cb && *cb == 0) return a;
      break;
    case BinOp::Sub:
      if (cb && *cb == 0) return a;
      break;
    case BinOp::Mul:
      if ((ca && *ca == 0) || (cb && *cb == 0)) return constant(0);
      if (ca && *ca == 1) return b;
      if (cb && *cb == 1) return a;
      break;
    case BinOp::And:
      if ((ca && *ca == 0) || (cb && *cb == 0)) return constant(0);
      if (ca && is_bool_valued(b)) return b;
      if (cb && is_bool_valued(a)) return a;
      break;
    case BinOp::Or:
      if ((ca && *ca != 0) || (cb && *cb != 0)) return constant(1);
      if (ca && is_bool_valued(b)) return b;
      if (cb && is_bool_valued(a)) return a;
      break;
    default:
      break;
  }
  return make({SymKind::Binary, 0, {}, op, std::move(a), std::move(b), 0});
}

Sym logical_not(Sym a) {
  if (auto c = const_value(a)) return constant(*c == 0);
  if (a->kind == SymKind::Not && is_bool_valued(a->lhs)) return a->lhs;
  return make({SymKind::Not, 0, {}, BinOp::Add, std::move(a), nullptr, 0});
}

Sym conjunction(const std::vector<Sym>& parts) {
  Sym acc = truth();
  for (const auto& p : parts) {
    Sym b = is_bool_valued(p) ? p : binary(BinOp::Ne, p, constant(0));
    acc = binary(BinOp::And, acc, b);
  }
  return acc;
}

Sym disjunction(const std::vector<Sym>& parts) {
  Sym acc = falsity();
  for (const auto& p : parts) {
    Sym b = is_bool_valued(p) ? p : binary(BinOp::Ne, p, constant(0));
    acc = binary(BinOp::Or, acc, b);
  }
  return acc;
}

void collect_vars(const Sym& s, std::set<VarKey>& out) {
  switch (s->kind) {
    case SymKind::Const: return;
    case SymKind::Var: out.insert(s->var); return;
    case SymKind::Binary:
      collect_vars(s->lhs, out);
      collect_vars(s->rhs, out);
      return;
    case SymKind::Not: collect_vars(s->lhs, out); return;
  }
}

std::set<VarKey> vars_of(const Sym& s) {
  std::set<VarKey> out;
  collect_vars(s, out);
  return out;
}

Sym substitute(const Sym& s, const Substitution& sub) {
  switch (s->kind) {
    case SymKind::Const: return s;
    case SymKind::Var: {
      auto r = sub(s->var);
      return r ? *r : s;
    }
    case SymKind::Binary: {
      Sym l = substitute(s->lhs, sub);
      Sym r = substitute(s->rhs, sub);
      if (l == s->lhs && r == s->rhs) return s;
      return binary(s->op, l, r);
    }
    case SymKind::Not: {
      Sym l = substitute(s->lhs, sub);
      if (l == s->lhs) return s;
      return logical_not(l);
    }
  }
  return s;
}

std::int32_t evaluate(const Sym& s, const Assignment& a) {
  switch (s->kind) {
    case SymKind::Const: return s->value;
    case SymKind::Var: {
      auto it = a.find(s->var);
      return it == a.end() ? 0 : it->second;
    }
    case SymKind::Binary: return apply_binop(s->op, evaluate(s->lhs, a), evaluate(s->rhs, a));
    case SymKind::Not: return evaluate(s->lhs, a) == 0;
  }
  return 0;
}

namespace {

void print(std::ostream& os, const Sym& s) {
  switch (s->kind) {
    case SymKind::Const: os << s->value; return;
    case SymKind::Var: os << to_string(s->var); return;
    case SymKind::Binary:
      os << "(";
      print(os, s->lhs);
      os << " " << to_string(s->op) << " ";
      print(os, s->rhs);
      os << ")";
      return;
    case SymKind::Not:
      os << "!";
      print(os, s->lhs);
      return;
  }
}

}  // namespace

std::string to_string(const Sym& s) {
  std::ostringstream os;
  print(os, s);
  return os.str();
}

Sym to_constraint(const PathCondition& pc) {
  std::vector<Sym> parts;
  parts.reserve(pc.size());
  for (const auto& l : pc) parts.push_back(l.as_constraint());
  return conjunction(parts);
}

}  // namespace shardsym::sym
