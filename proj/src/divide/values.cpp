#include "shardsym/divide/values.hpp"

namespace shardsym {

Origin Origin::null(std::string record) {
  Origin o;
  o.record = std::move(record);
  return o;
}

Origin Origin::param(std::string name, std::string record) {
  Origin o;
  o.kind = Kind::Param;
  o.key = std::move(name);
  o.record = std::move(record);
  return o;
}

Origin Origin::alloc(std::string key, std::string record) {
  Origin o;
  o.kind = Kind::Alloc;
  o.key = std::move(key);
  o.record = std::move(record);
  return o;
}

Origin Origin::load(const Origin& base, std::string field, std::string record) {
  Origin o;
  o.kind = Kind::Load;
  o.base = std::make_shared<const Origin>(base);
  o.field = std::move(field);
  o.record = std::move(record);
  return o;
}

Origin Origin::opaque(std::string key, std::string record) {
  Origin o;
  o.kind = Kind::Opaque;
  o.key = std::move(key);
  o.record = std::move(record);
  return o;
}

std::string Origin::str() const {
  switch (kind) {
    case Kind::Null: return "null";
    case Kind::Param: return "param:" + key;
    case Kind::Alloc: return "alloc:" + key;
    case Kind::Load: return base->str() + "->" + field;
    case Kind::Opaque: return "opaque:" + key;
  }
  return "?";
}

std::string to_string(const SymValue& v) {
  if (auto* s = std::get_if<sym::Sym>(&v)) return sym::to_string(*s);
  if (auto* t = std::get_if<sym::TaintString>(&v)) return t->to_string();
  if (auto* o = std::get_if<Origin>(&v)) return o->str();
  const auto& a = std::get<SymArray>(v);
  std::string out = "[";
  for (size_t i = 0; i < a.elems.size(); ++i) out += (i ? ", " : "") + sym::to_string(a.elems[i]);
  return out + "]";
}

bool same_value(const SymValue& a, const SymValue& b) {
  if (a.index() != b.index()) return false;
  if (auto* s = std::get_if<sym::Sym>(&a)) return sym::equal(*s, std::get<sym::Sym>(b));
  if (auto* t = std::get_if<sym::TaintString>(&a)) return *t == std::get<sym::TaintString>(b);
  if (auto* o = std::get_if<Origin>(&a)) return *o == std::get<Origin>(b);
  const auto& x = std::get<SymArray>(a).elems;
  const auto& y = std::get<SymArray>(b).elems;
  if (x.size() != y.size()) return false;
  for (size_t i = 0; i < x.size(); ++i)
    if (!sym::equal(x[i], y[i])) return false;
  return true;
}

sym::Sym instantiate(const sym::Sym& s, const Instantiation& in) {
  return sym::substitute(s, [&](const sym::VarKey& k) -> std::optional<sym::Sym> {
    switch (k.kind) {
      case sym::VarKey::Kind::Param: {
        auto it = in.params.find(k.name);
        if (it == in.params.end()) return std::nullopt;
        return std::get<sym::Sym>(it->second);
      }
      case sym::VarKey::Kind::Input:
        if (in.int_offset == 0) return std::nullopt;
        return sym::input_var(k.index + in.int_offset);
      case sym::VarKey::Kind::Unconstrained:
        if (in.prefix.empty()) return std::nullopt;
        return sym::unconstrained(in.prefix + k.name);
    }
    return std::nullopt;
  });
}

sym::TaintString instantiate(const sym::TaintString& t, const Instantiation& in) {
  return t.rewrite([&](const sym::Segment& s) -> std::optional<sym::TaintString> {
    switch (s.kind) {
      case sym::Segment::Kind::Param: {
        auto it = in.params.find(s.text);
        if (it == in.params.end()) return std::nullopt;
        return std::get<sym::TaintString>(it->second);
      }
      case sym::Segment::Kind::Input: return sym::TaintString::input(s.index + in.str_offset);
      case sym::Segment::Kind::Opaque: return sym::TaintString::opaque(in.prefix + s.text);
      case sym::Segment::Kind::Literal: return std::nullopt;
    }
    return std::nullopt;
  });
}

Origin instantiate(const Origin& o, const Instantiation& in) {
  switch (o.kind) {
    case Origin::Kind::Null: return o;
    case Origin::Kind::Param: {
      auto it = in.params.find(o.key);
      if (it == in.params.end()) return o;
      return std::get<Origin>(it->second);
    }
    case Origin::Kind::Alloc: return Origin::alloc(in.prefix + o.key, o.record);
    case Origin::Kind::Load: return Origin::load(instantiate(*o.base, in), o.field, o.record);
    case Origin::Kind::Opaque: return Origin::opaque(in.prefix + o.key, o.record);
  }
  return o;
}

SymValue instantiate(const SymValue& v, const Instantiation& in) {
  if (auto* s = std::get_if<sym::Sym>(&v)) return instantiate(*s, in);
  if (auto* t = std::get_if<sym::TaintString>(&v)) return instantiate(*t, in);
  if (auto* o = std::get_if<Origin>(&v)) return instantiate(*o, in);
  SymArray a = std::get<SymArray>(v);
  for (auto& e : a.elems) e = instantiate(e, in);
  return a;
}

sym::PathCondition instantiate(const sym::PathCondition& pc, const Instantiation& in) {
  sym::PathCondition out;
  out.reserve(pc.size());
  for (const auto& l : pc) out.push_back({instantiate(l.cond, in), l.positive});
  return out;
}

}  // namespace shardsym
