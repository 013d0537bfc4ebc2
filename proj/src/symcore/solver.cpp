#include "shardsym/symcore/solver.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <unordered_map>

namespace shardsym::sym {

namespace {

// Expression compiled against dense variable indices for fast evaluation.
class Compiled {
public:
  Compiled() = default;
  Compiled(const Sym& s, const std::map<VarKey, int>& index) { emit(s, index); }

  std::int32_t eval(const std::vector<std::int32_t>& values) const {
    std::int32_t stack[64];
    int sp = 0;
    // Deep trees fall back to a heap stack.
    if (depth_ > 60) return eval_slow(values);
    for (const auto& in : code_) {
      switch (in.kind) {
        case Kind::Const: stack[sp++] = in.value; break;
        case Kind::Var: stack[sp++] = values[in.value]; break;
        case Kind::Not: stack[sp - 1] = stack[sp - 1] == 0; break;
        case Kind::Bin: {
          std::int32_t b = stack[--sp];
          stack[sp - 1] = apply_binop(in.op, stack[sp - 1], b);
          break;
        }
      }
    }
    return stack[0];
  }

private:
  enum class Kind { Const, Var, Not, Bin };
  struct Instr {
    Kind kind;
    std::int32_t value;
    BinOp op;
  };

  std::int32_t eval_slow(const std::vector<std::int32_t>& values) const {
    std::vector<std::int32_t> stack;
    for (const auto& in : code_) {
      switch (in.kind) {
        case Kind::Const: stack.push_back(in.value); break;
        case Kind::Var: stack.push_back(values[in.value]); break;
        case Kind::Not: stack.back() = stack.back() == 0; break;
        case Kind::Bin: {
          std::int32_t b = stack.back();
          stack.pop_back();
          stack.back() = apply_binop(in.op, stack.back(), b);
          break;
        }
      }
    }
    return stack.back();
  }

  int emit(const Sym& s, const std::map<VarKey, int>& index) {
    switch (s->kind) {
      case SymKind::Const: code_.push_back({Kind::Const, s->value, BinOp::Add}); return bump(1);
      case SymKind::Var: code_.push_back({Kind::Var, index.at(s->var), BinOp::Add}); return bump(1);
      case SymKind::Not: {
        int d = emit(s->lhs, index);
        code_.push_back({Kind::Not, 0, BinOp::Add});
        return d;
      }
      case SymKind::Binary: {
        int a = emit(s->lhs, index);
        int b = emit(s->rhs, index);
        code_.push_back({Kind::Bin, 0, s->op});
        return bump(std::max(a, b + 1));
      }
    }
    return 0;
  }

  int bump(int d) {
    depth_ = std::max(depth_, d);
    return d;
  }

  std::vector<Instr> code_;
  int depth_ = 0;
};

struct Linear {
  std::vector<std::pair<int, std::int64_t>> terms;  // (var index, coefficient)
  std::int64_t constant = 0;
};

constexpr std::int64_t kCoeffLimit = std::int64_t{1} << 31;

std::optional<Linear> linearize(const Sym& s, const std::map<VarKey, int>& index) {
  switch (s->kind) {
    case SymKind::Const: return Linear{{}, s->value};
    case SymKind::Var: return Linear{{{index.at(s->var), 1}}, 0};
    case SymKind::Not: return std::nullopt;
    case SymKind::Binary: break;
  }
  if (s->op != BinOp::Add && s->op != BinOp::Sub && s->op != BinOp::Mul) return std::nullopt;
  auto a = linearize(s->lhs, index);
  auto b = linearize(s->rhs, index);
  if (!a || !b) return std::nullopt;
  auto scale = [](Linear l, std::int64_t k) -> std::optional<Linear> {
    for (auto& t : l.terms) {
      t.second *= k;
      if (t.second > kCoeffLimit || t.second < -kCoeffLimit) return std::nullopt;
    }
    l.constant *= k;
    if (l.constant > kCoeffLimit * 4 || l.constant < -kCoeffLimit * 4) return std::nullopt;
    return l;
  };
  if (s->op == BinOp::Mul) {
    if (a->terms.empty()) return scale(*b, a->constant);
    if (b->terms.empty()) return scale(*a, b->constant);
    return std::nullopt;
  }
  std::int64_t sign = s->op == BinOp::Add ? 1 : -1;
  std::map<int, std::int64_t> acc;
  for (const auto& [v, c] : a->terms) acc[v] += c;
  for (const auto& [v, c] : b->terms) acc[v] += sign * c;
  Linear out;
  out.constant = a->constant + sign * b->constant;
  for (const auto& [v, c] : acc) {
    if (c > kCoeffLimit || c < -kCoeffLimit) return std::nullopt;
    if (c != 0) out.terms.push_back({v, c});
  }
  return out;
}

bool is_comparison(BinOp op) {
  switch (op) {
    case BinOp::Eq:
    case BinOp::Ne:
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge: return true;
    default: return false;
  }
}

BinOp negate(BinOp op) {
  switch (op) {
    case BinOp::Eq: return BinOp::Ne;
    case BinOp::Ne: return BinOp::Eq;
    case BinOp::Lt: return BinOp::Ge;
    case BinOp::Le: return BinOp::Gt;
    case BinOp::Gt: return BinOp::Le;
    case BinOp::Ge: return BinOp::Lt;
    default: return op;
  }
}

// A comparison `lhs rel rhs`.
struct AtomProto {
  Sym lhs;
  Sym rhs;
  BinOp rel;
};

using ProtoConj = std::vector<AtomProto>;

struct DnfOverflow {};

std::vector<ProtoConj> dnf(const Sym& s, bool positive, std::size_t cap) {
  if (auto c = const_value(s)) {
    bool t = (*c != 0) == positive;
    return t ? std::vector<ProtoConj>{ProtoConj{}} : std::vector<ProtoConj>{};
  }
  if (s->kind == SymKind::Not) return dnf(s->lhs, !positive, cap);
  if (s->kind == SymKind::Binary && (s->op == BinOp::And || s->op == BinOp::Or)) {
    bool product = (s->op == BinOp::And) == positive;
    auto a = dnf(s->lhs, positive, cap);
    auto b = dnf(s->rhs, positive, cap);
    if (!product) {
      if (a.size() + b.size() > cap) throw DnfOverflow{};
      a.insert(a.end(), b.begin(), b.end());
      return a;
    }
    if (a.size() * b.size() > cap) throw DnfOverflow{};
    std::vector<ProtoConj> out;
    out.reserve(a.size() * b.size());
    for (const auto& x : a)
      for (const auto& y : b) {
        ProtoConj c = x;
        c.insert(c.end(), y.begin(), y.end());
        out.push_back(std::move(c));
      }
    return out;
  }
  if (s->kind == SymKind::Binary && is_comparison(s->op)) {
    return {ProtoConj{{s->lhs, s->rhs, positive ? s->op : negate(s->op)}}};
  }
  return {ProtoConj{{s, constant(0), positive ? BinOp::Ne : BinOp::Eq}}};
}

struct Atom {
  Compiled lhs;
  Compiled rhs;
  BinOp rel;
  std::optional<Linear> lin;  // lhs - rhs
  int last_var = -1;          // highest variable index involved

  bool holds(const std::vector<std::int32_t>& values) const {
    return apply_binop(rel, lhs.eval(values), rhs.eval(values)) != 0;
  }
};

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

struct Box {
  std::vector<std::int64_t> lo;
  std::vector<std::int64_t> hi;
};

// Tightens `sum(c_i x_i) + k <= 0`; false when infeasible.
bool tighten_le(const std::vector<std::pair<int, std::int64_t>>& terms, std::int64_t k, Box& box, bool& changed) {
  std::int64_t minsum = k;
  for (const auto& [v, c] : terms) minsum += c > 0 ? c * box.lo[v] : c * box.hi[v];
  if (minsum > 0) return false;
  for (const auto& [v, c] : terms) {
    std::int64_t own = c > 0 ? c * box.lo[v] : c * box.hi[v];
    std::int64_t budget = -(minsum - own);  // c * x_v <= budget
    if (c > 0) {
      std::int64_t ub = floor_div(budget, c);
      if (ub < box.hi[v]) {
        box.hi[v] = ub;
        changed = true;
      }
    } else {
      std::int64_t lb = ceil_div(budget, c);
      if (lb > box.lo[v]) {
        box.lo[v] = lb;
        changed = true;
      }
    }
    if (box.lo[v] > box.hi[v]) return false;
  }
  return true;
}

bool tighten(const Atom& a, Box& box, bool& changed) {
  const Linear& l = *a.lin;
  auto negated = [&] {
    std::vector<std::pair<int, std::int64_t>> t = l.terms;
    for (auto& x : t) x.second = -x.second;
    return t;
  };
  switch (a.rel) {
    case BinOp::Le: return tighten_le(l.terms, l.constant, box, changed);
    case BinOp::Lt: return tighten_le(l.terms, l.constant + 1, box, changed);
    case BinOp::Ge: return tighten_le(negated(), -l.constant, box, changed);
    case BinOp::Gt: return tighten_le(negated(), -l.constant + 1, box, changed);
    case BinOp::Eq:
      return tighten_le(l.terms, l.constant, box, changed) && tighten_le(negated(), -l.constant, box, changed);
    case BinOp::Ne: {
      int open = -1;
      std::int64_t fixed = l.constant;
      for (const auto& [v, c] : l.terms) {
        if (box.lo[v] == box.hi[v]) {
          fixed += c * box.lo[v];
        } else if (open == -1) {
          open = v;
        } else {
          return true;
        }
      }
      if (open == -1) return fixed != 0;
      std::int64_t c = 0;
      for (const auto& t : l.terms)
        if (t.first == open) c = t.second;
      if ((-fixed) % c != 0) return true;
      std::int64_t banned = -fixed / c;
      if (banned == box.lo[open]) {
        ++box.lo[open];
        changed = true;
      } else if (banned == box.hi[open]) {
        --box.hi[open];
        changed = true;
      }
      return box.lo[open] <= box.hi[open];
    }
    default: return true;
  }
}

bool propagate(const std::vector<const Atom*>& linear, Box& box) {
  for (int round = 0; round < 64; ++round) {
    bool changed = false;
    for (const Atom* a : linear)
      if (!tighten(*a, box, changed)) return false;
    if (!changed) break;
  }
  return true;
}

struct BudgetExceeded {};

class ConjunctSearch {
public:
  ConjunctSearch(const std::vector<Atom>& atoms, int nvars, Domain dom, std::uint64_t& budget)
      : nvars_(nvars), budget_(budget) {
    box_.lo.assign(nvars, dom.lo);
    box_.hi.assign(nvars, dom.hi);
    by_last_.resize(nvars);
    for (const auto& a : atoms) {
      if (a.lin) linear_.push_back(&a);
      if (a.last_var >= 0) by_last_[a.last_var].push_back(&a);
      else ground_.push_back(&a);
    }
  }

  // Lexicographically smallest model, optionally only those strictly below `bound`.
  std::optional<std::vector<std::int32_t>> lexmin(const std::vector<std::int32_t>* bound) {
    std::vector<std::int32_t> values(nvars_, 0);
    for (const Atom* a : ground_)
      if (!a->holds(values)) return std::nullopt;
    Box box = box_;
    if (!propagate(linear_, box)) return std::nullopt;
    bound_ = bound;
    if (dfs(0, box, values, bound != nullptr)) return values;
    return std::nullopt;
  }

private:
  bool dfs(int i, const Box& box, std::vector<std::int32_t>& values, bool tight) {
    if (i == nvars_) return !tight;  // equal to the bound is not an improvement
    std::int64_t hi = box.hi[i];
    if (tight) hi = std::min<std::int64_t>(hi, (*bound_)[i]);
    for (std::int64_t v = box.lo[i]; v <= hi; ++v) {
      if (++budget_ == 0) throw BudgetExceeded{};
      values[i] = static_cast<std::int32_t>(v);
      bool ok = true;
      for (const Atom* a : by_last_[i])
        if (!a->holds(values)) {
          ok = false;
          break;
        }
      if (!ok) continue;
      Box next = box;
      next.lo[i] = next.hi[i] = v;
      if (!propagate(linear_, next)) continue;
      if (dfs(i + 1, next, values, tight && v == (*bound_)[i])) return true;
    }
    return false;
  }

  int nvars_;
  std::uint64_t& budget_;
  Box box_;
  std::vector<const Atom*> linear_;
  std::vector<const Atom*> ground_;
  std::vector<std::vector<const Atom*>> by_last_;
  const std::vector<std::int32_t>* bound_ = nullptr;
};

int last_var_of(const Sym& a, const Sym& b, const std::map<VarKey, int>& index) {
  std::set<VarKey> vs;
  collect_vars(a, vs);
  collect_vars(b, vs);
  int last = -1;
  for (const auto& v : vs) last = std::max(last, index.at(v));
  return last;
}

// Solves a constraint whose conjuncts all share variables.
SolverVerdict solve_connected(const Sym& constraint, const std::set<VarKey>& vars, const SolverConfig& cfg) {
  SolverVerdict verdict;
  if (static_cast<int>(vars.size()) > cfg.vars_max) {
    verdict.status = SolverVerdict::Status::Unknown;
    verdict.reason = "variable count " + std::to_string(vars.size()) + " exceeds limit " + std::to_string(cfg.vars_max);
    return verdict;
  }
  std::map<VarKey, int> index;
  std::vector<VarKey> order(vars.begin(), vars.end());
  for (size_t i = 0; i < order.size(); ++i) index[order[i]] = static_cast<int>(i);

  std::vector<ProtoConj> conjs;
  try {
    conjs = dnf(constraint, true, cfg.dnf_max);
  } catch (const DnfOverflow&) {
    conjs = {ProtoConj{{constraint, constant(0), BinOp::Ne}}};
  }

  std::uint64_t budget = ~std::uint64_t{0} - cfg.search_budget;
  std::optional<std::vector<std::int32_t>> best;
  try {
    for (const auto& pc : conjs) {
      std::vector<Atom> atoms;
      atoms.reserve(pc.size());
      for (const auto& p : pc) {
        Atom a{Compiled(p.lhs, index), Compiled(p.rhs, index), p.rel, std::nullopt, last_var_of(p.lhs, p.rhs, index)};
        if (auto l = linearize(binary(BinOp::Sub, p.lhs, p.rhs), index)) {
          // The linear form is exact only while the difference stays in 32 bits;
          // it is used for pruning, and every model is re-checked below.
          a.lin = l;
        }
        atoms.push_back(std::move(a));
      }
      ConjunctSearch search(atoms, static_cast<int>(order.size()), cfg.domain, budget);
      auto m = search.lexmin(best ? &*best : nullptr);
      if (m) best = std::move(m);
    }
  } catch (const BudgetExceeded&) {
    verdict.status = SolverVerdict::Status::Unknown;
    verdict.reason = "search budget exhausted";
    return verdict;
  }

  if (!best) {
    verdict.status = SolverVerdict::Status::Unsat;
    return verdict;
  }
  for (size_t i = 0; i < order.size(); ++i) verdict.model[order[i]] = (*best)[i];
  if (evaluate(constraint, verdict.model) == 0) {
    // Linear pruning disagreed with wrap-around evaluation (overflow).
    verdict.model.clear();
    verdict.status = SolverVerdict::Status::Unknown;
    verdict.reason = "arithmetic overflow in linear reasoning";
    return verdict;
  }
  verdict.status = SolverVerdict::Status::Sat;
  return verdict;
}

void flatten_and(const Sym& s, std::vector<Sym>& out) {
  if (s->kind == SymKind::Binary && s->op == BinOp::And) {
    flatten_and(s->lhs, out);
    flatten_and(s->rhs, out);
  } else {
    out.push_back(s);
  }
}

}  // namespace

SolverVerdict check_sat(const Sym& constraint, const SolverConfig& cfg) {
  std::set<VarKey> vars = vars_of(constraint);
  // Conjuncts that share no variables are solved independently; the union of
  // the per-group lexicographic minima is the overall minimum.
  std::vector<Sym> conjuncts;
  flatten_and(constraint, conjuncts);
  std::map<VarKey, VarKey> parent;
  for (const auto& v : vars) parent[v] = v;
  auto find = [&](VarKey v) {
    while (parent.at(v) != v) v = parent.at(v);
    return v;
  };
  std::vector<std::set<VarKey>> conj_vars;
  for (const auto& c : conjuncts) {
    conj_vars.push_back(vars_of(c));
    const auto& vs = conj_vars.back();
    if (vs.empty()) continue;
    VarKey root = find(*vs.begin());
    for (const auto& v : vs) {
      VarKey r = find(v);
      if (r != root) parent[std::max(r, root)] = std::min(r, root);
      root = std::min(r, root);
    }
  }
  std::map<VarKey, std::vector<Sym>> groups;
  std::map<VarKey, std::set<VarKey>> group_vars;
  for (size_t i = 0; i < conjuncts.size(); ++i) {
    if (conj_vars[i].empty()) {
      if (evaluate(conjuncts[i], {}) == 0) return SolverVerdict{SolverVerdict::Status::Unsat, {}, {}};
      continue;
    }
    VarKey r = find(*conj_vars[i].begin());
    groups[r].push_back(conjuncts[i]);
    group_vars[r].insert(conj_vars[i].begin(), conj_vars[i].end());
  }
  if (groups.size() <= 1) return solve_connected(constraint, vars, cfg);
  SolverVerdict verdict;
  verdict.status = SolverVerdict::Status::Sat;
  for (const auto& [root, parts] : groups) {
    SolverVerdict v = solve_connected(conjunction(parts), group_vars.at(root), cfg);
    if (v.unsat()) return v;
    if (v.unknown()) {
      verdict.status = SolverVerdict::Status::Unknown;
      verdict.reason = v.reason;
      verdict.model.clear();
    }
    if (verdict.sat()) verdict.model.insert(v.model.begin(), v.model.end());
  }
  return verdict;
}

SolverVerdict check_sat(const PathCondition& pc, const SolverConfig& cfg) { return check_sat(to_constraint(pc), cfg); }

}  // namespace shardsym::sym
