#include "shardsym/symcore/taint.hpp"

namespace shardsym::sym {

TaintString TaintString::literal(std::string text) {
  if (text.empty()) return {};
  return TaintString({Segment{Segment::Kind::Literal, std::move(text), 0, false}});
}

TaintString TaintString::input(int index) { return TaintString({Segment{Segment::Kind::Input, {}, index, false}}); }

TaintString TaintString::param(std::string name) {
  return TaintString({Segment{Segment::Kind::Param, std::move(name), 0, false}});
}

TaintString TaintString::opaque(std::string key) {
  return TaintString({Segment{Segment::Kind::Opaque, std::move(key), 0, false}});
}

TaintString TaintString::concat(const TaintString& other) const {
  std::vector<Segment> out = segments_;
  for (const auto& s : other.segments_) {
    if (s.kind == Segment::Kind::Literal && !out.empty() && out.back().kind == Segment::Kind::Literal)
      out.back().text += s.text;
    else
      out.push_back(s);
  }
  return TaintString(std::move(out));
}

TaintString TaintString::sanitized() const {
  std::vector<Segment> out = segments_;
  for (auto& s : out)
    if (s.kind != Segment::Kind::Literal) s.sanitized = true;
  return TaintString(std::move(out));
}

bool TaintString::has_unsanitized_input() const { return first_unsanitized_input().has_value(); }

std::optional<int> TaintString::first_unsanitized_input() const {
  for (const auto& s : segments_)
    if (s.kind == Segment::Kind::Input && !s.sanitized) return s.index;
  return std::nullopt;
}

TaintString TaintString::rewrite(const std::function<std::optional<TaintString>(const Segment&)>& f) const {
  TaintString out;
  for (const auto& s : segments_) {
    auto r = s.kind == Segment::Kind::Literal ? std::nullopt : f(s);
    if (!r) {
      out = out.concat(TaintString({s}));
      continue;
    }
    out = out.concat(s.sanitized ? r->sanitized() : *r);
  }
  return out;
}

std::string TaintString::to_string() const {
  std::string out;
  for (const auto& s : segments_) {
    if (!out.empty()) out += " ++ ";
    switch (s.kind) {
      case Segment::Kind::Literal: out += "\"" + s.text + "\""; break;
      case Segment::Kind::Input: out += "input_str#" + std::to_string(s.index); break;
      case Segment::Kind::Param: out += "param:" + s.text; break;
      case Segment::Kind::Opaque: out += "?" + s.text; break;
    }
    if (s.sanitized) out += "[sanitized]";
  }
  return out.empty() ? "\"\"" : out;
}

}  // namespace shardsym::sym
