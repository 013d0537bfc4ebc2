#pragma once

#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "shardsym/frontend/ast.hpp"

namespace shardsym {

class ParseError : public std::runtime_error {
public:
  ParseError(SourceLoc loc, std::string found, std::set<std::string> expected);

  SourceLoc loc() const { return loc_; }
  const std::string& found() const { return found_; }
  const std::set<std::string>& expected() const { return expected_; }

private:
  SourceLoc loc_;
  std::string found_;
  std::set<std::string> expected_;
};

/// Parses MinC source text. Throws ParseError on the first syntax error.
Program parse_program(std::string_view source);

struct TypeError {
  SourceLoc loc;
  std::string message;
};

/// A program that passed type checking. Expressions carry their types and
/// call/alloc sites carry per-function ids.
class TypedProgram {
public:
  explicit TypedProgram(Program p) : program_(std::make_shared<const Program>(std::move(p))) {}

  const Program& program() const { return *program_; }
  const FunctionDecl& function(const std::string& name) const;
  const RecordDecl& record(const std::string& name) const;

private:
  std::shared_ptr<const Program> program_;
};

struct TypecheckResult {
  std::optional<TypedProgram> program;
  std::vector<TypeError> errors;

  bool ok() const { return program.has_value(); }
};

/// Collects every type error rather than stopping at the first one.
TypecheckResult typecheck(Program p);

/// parse + typecheck; throws ParseError, or std::runtime_error listing the type errors.
TypedProgram load_program(std::string_view source);
TypedProgram load_program_file(const std::string& path);

}  // namespace shardsym
