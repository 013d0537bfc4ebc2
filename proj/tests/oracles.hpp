#pragma once

// Test-only reference implementations used to freeze and cross-check
// expected values. Nothing here calls into the solver.

#include <optional>
#include <random>
#include <vector>

#include "shardsym/symcore/expr.hpp"
#include "shardsym/symcore/solver.hpp"

namespace shardsym::testing {

/// Exhaustive enumeration in lexicographic order (first variable most
/// significant, values ascending): the first satisfying tuple.
inline std::optional<sym::Assignment> brute_force_model(const sym::Sym& c, sym::Domain dom) {
  std::set<sym::VarKey> vs = sym::vars_of(c);
  std::vector<sym::VarKey> order(vs.begin(), vs.end());
  std::vector<std::int32_t> values(order.size(), dom.lo);
  sym::Assignment a;
  for (;;) {
    for (size_t i = 0; i < order.size(); ++i) a[order[i]] = values[i];
    if (sym::evaluate(c, a) != 0) return a;
    int i = static_cast<int>(order.size()) - 1;
    while (i >= 0 && values[i] == dom.hi) {
      values[i] = dom.lo;
      --i;
    }
    if (i < 0) return std::nullopt;
    ++values[i];
  }
}

/// Random int/boolean expressions over up to three variables.
class ConstraintGen {
public:
  explicit ConstraintGen(std::uint32_t seed) : rng_(seed) {}

  sym::Sym boolean(int depth) {
    int pick = uniform(0, depth <= 0 ? 1 : 5);
    switch (pick) {
      case 0:
      case 1: return comparison(depth);
      case 2: return sym::binary(BinOp::And, boolean(depth - 1), boolean(depth - 1));
      case 3: return sym::binary(BinOp::Or, boolean(depth - 1), boolean(depth - 1));
      case 4: return sym::logical_not(boolean(depth - 1));
      default: return comparison(depth);
    }
  }

  sym::Sym comparison(int depth) {
    static const BinOp rels[] = {BinOp::Eq, BinOp::Ne, BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge};
    return sym::binary(rels[uniform(0, 5)], term(depth), term(depth));
  }

  sym::Sym term(int depth) {
    int pick = uniform(0, depth <= 0 ? 1 : 4);
    switch (pick) {
      case 0: return sym::constant(uniform(-10, 10));
      case 1: return variable();
      case 2: return sym::binary(BinOp::Add, term(depth - 1), term(depth - 1));
      case 3: return sym::binary(BinOp::Sub, term(depth - 1), term(depth - 1));
      default:
        // Mostly linear; occasionally a product of two terms.
        if (uniform(0, 3) == 0) return sym::binary(BinOp::Mul, term(depth - 1), term(depth - 1));
        return sym::binary(BinOp::Mul, sym::constant(uniform(-4, 4)), term(depth - 1));
    }
  }

  sym::Sym variable() {
    static const char* names[] = {"a", "b", "c"};
    return sym::param_var(names[uniform(0, 2)]);
  }

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

private:
  std::mt19937 rng_;
};

}  // namespace shardsym::testing
