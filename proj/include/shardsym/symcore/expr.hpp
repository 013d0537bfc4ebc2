#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "shardsym/frontend/ast.hpp"

namespace shardsym::sym {

/// 32-bit wrap-around arithmetic shared by constant folding, model checking
/// and the concrete interpreter.
std::int32_t wrap_add(std::int32_t a, std::int32_t b);
std::int32_t wrap_sub(std::int32_t a, std::int32_t b);
std::int32_t wrap_mul(std::int32_t a, std::int32_t b);
std::int32_t apply_binop(BinOp op, std::int32_t a, std::int32_t b);

/// A solver variable. Input(k) is the k-th int input consumed since the
/// start of the enclosing function; Param is a parameter of the function
/// being summarized; Unconstrained is a fresh unknown (heap load, recursion
/// cut-off, symbolic array read) identified by a deterministic key.
struct VarKey {
  enum class Kind { Input, Param, Unconstrained };
  Kind kind = Kind::Input;
  int index = 0;
  std::string name;

  static VarKey input(int k) { return {Kind::Input, k, {}}; }
  static VarKey param(std::string n) { return {Kind::Param, 0, std::move(n)}; }
  static VarKey unconstrained(std::string key) { return {Kind::Unconstrained, 0, std::move(key)}; }

  auto operator<=>(const VarKey&) const = default;
  bool operator==(const VarKey&) const = default;
};

std::string to_string(const VarKey& v);

enum class SymKind { Const, Var, Binary, Not };

struct SymNode;
using Sym = std::shared_ptr<const SymNode>;

/// Immutable int-valued expression tree. Comparisons and logical operators
/// yield 0/1 like their MinC counterparts.
struct SymNode {
  SymKind kind = SymKind::Const;
  std::int32_t value = 0;
  VarKey var;
  BinOp op = BinOp::Add;
  Sym lhs;
  Sym rhs;
  std::size_t hash = 0;
};

Sym constant(std::int32_t v);
Sym var(VarKey k);
Sym input_var(int k);
Sym param_var(const std::string& name);
Sym unconstrained(const std::string& key);
/// Builds `a op b`, folding ground subtrees and simple identities.
Sym binary(BinOp op, Sym a, Sym b);
/// Logical negation, `!a`.
Sym logical_not(Sym a);
/// Conjunction of truth values (empty = true).
Sym conjunction(const std::vector<Sym>& parts);
Sym disjunction(const std::vector<Sym>& parts);

Sym truth();
Sym falsity();

bool is_const(const Sym& s);
std::optional<std::int32_t> const_value(const Sym& s);
bool equal(const Sym& a, const Sym& b);

void collect_vars(const Sym& s, std::set<VarKey>& out);
std::set<VarKey> vars_of(const Sym& s);

using Substitution = std::function<std::optional<Sym>(const VarKey&)>;
/// Replaces variables for which `sub` returns a value; re-folds the result.
Sym substitute(const Sym& s, const Substitution& sub);

using Assignment = std::map<VarKey, std::int32_t>;
/// Evaluates under a full assignment; unassigned variables read as 0.
std::int32_t evaluate(const Sym& s, const Assignment& a);

std::string to_string(const Sym& s);

/// One branch decision on a path: `cond` taken when positive, else its negation.
struct Literal {
  Sym cond;
  bool positive = true;

  Sym as_constraint() const { return positive ? cond : logical_not(cond); }
};

using PathCondition = std::vector<Literal>;

Sym to_constraint(const PathCondition& pc);

}  // namespace shardsym::sym
