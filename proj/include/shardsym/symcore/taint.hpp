#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace shardsym::sym {

/// One piece of a string value. Input(k) is the k-th string input consumed
/// since the start of the enclosing function; Param is a str parameter of the
/// function being summarized; Opaque is a string of unknown provenance.
struct Segment {
  enum class Kind { Literal, Input, Param, Opaque };

  Kind kind = Kind::Literal;
  std::string text;   // Literal text, Param name or Opaque key
  int index = 0;      // Input only
  bool sanitized = false;

  bool operator==(const Segment&) const = default;
};

/// Strings are tracked as ordered segment lists, so sanitization is a
/// per-segment flag rather than a character-level property.
class TaintString {
public:
  TaintString() = default;
  explicit TaintString(std::vector<Segment> segs) : segments_(std::move(segs)) {}

  static TaintString literal(std::string text);
  static TaintString input(int index);
  static TaintString param(std::string name);
  static TaintString opaque(std::string key);

  const std::vector<Segment>& segments() const { return segments_; }

  TaintString concat(const TaintString& other) const;
  TaintString sanitized() const;

  bool has_unsanitized_input() const;
  /// Index of the first unsanitized Input segment.
  std::optional<int> first_unsanitized_input() const;

  /// Rewrites Param/Input/Opaque segments. The callback returns the
  /// replacement segments for a segment; `std::nullopt` keeps it unchanged.
  /// Replacements inherit the sanitized flag of the segment they replace.
  TaintString rewrite(const std::function<std::optional<TaintString>(const Segment&)>& f) const;

  std::string to_string() const;

  bool operator==(const TaintString&) const = default;

private:
  std::vector<Segment> segments_;
};

}  // namespace shardsym::sym
