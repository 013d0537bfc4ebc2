#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "shardsym/symcore/expr.hpp"
#include "shardsym/symcore/taint.hpp"

namespace shardsym {

/// Where a reference points, relative to the function being summarized.
///   Null          the default value of an unset Ref field
///   Param(p)      whatever the caller passed as p
///   Alloc(k)      a block allocated on this path; k = "a<site>.<n>", prefixed
///                 with "c<site>.<n>/" for every call level it came through
///   Load(b, f)    the reference stored in field f of b when it was read
///   Opaque(k)     unknown (recursion cut-off)
struct Origin {
  enum class Kind { Null, Param, Alloc, Load, Opaque };

  Kind kind = Kind::Null;
  std::string key;
  std::shared_ptr<const Origin> base;   // Load
  std::string field;                    // Load
  std::string record;                   // static type of the reference

  static Origin null(std::string record);
  static Origin param(std::string name, std::string record);
  static Origin alloc(std::string key, std::string record);
  static Origin load(const Origin& base, std::string field, std::string record);
  static Origin opaque(std::string key, std::string record);

  std::string str() const;
  bool operator==(const Origin& o) const { return str() == o.str(); }
};

struct SymArray {
  std::vector<sym::Sym> elems;
};

using SymValue = std::variant<sym::Sym, sym::TaintString, Origin, SymArray>;

std::string to_string(const SymValue& v);
bool same_value(const SymValue& a, const SymValue& b);

/// Maps a callee's leaves into the caller's terms when a summary entry is applied.
struct Instantiation {
  std::map<std::string, SymValue> params;
  int int_offset = 0;    // int inputs the caller consumed before the call
  int str_offset = 0;
  std::string prefix;    // "c<site>.<n>/", prepended to the callee's allocation and unknown keys
};

sym::Sym instantiate(const sym::Sym& s, const Instantiation& in);
sym::TaintString instantiate(const sym::TaintString& t, const Instantiation& in);
Origin instantiate(const Origin& o, const Instantiation& in);
SymValue instantiate(const SymValue& v, const Instantiation& in);
sym::PathCondition instantiate(const sym::PathCondition& pc, const Instantiation& in);

}  // namespace shardsym
