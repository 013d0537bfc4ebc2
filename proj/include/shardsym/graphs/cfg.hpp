#pragma once

#include <string>
#include <vector>

#include "shardsym/frontend/parser.hpp"

namespace shardsym {

enum class EdgeKind { Fallthrough, TrueBranch, FalseBranch, LoopBack };

const char* to_string(EdgeKind k);

struct CfgEdge {
  int from = 0;
  int to = 0;
  EdgeKind kind = EdgeKind::Fallthrough;
};

enum class Terminator {
  Goto,     // single successor
  Branch,   // `cond` decides between the true and false successor
  Return,   // `ret` is the return statement, or null for falling off a void function
  Exit,     // the shared sink when a function has several returns
};

struct BasicBlock {
  int id = 0;
  std::vector<const Stmt*> stmts;   // Let, Assign, Free and expression statements only
  Terminator term = Terminator::Goto;
  const Expr* cond = nullptr;
  const Stmt* ret = nullptr;
  bool loop_guard = false;
  SourceLoc loc;
};

/// Intraprocedural control-flow graph of one function.
struct Cfg {
  std::string function;
  std::vector<BasicBlock> blocks;
  std::vector<CfgEdge> edges;
  int entry = 0;
  std::vector<int> exits;   // blocks ending in a return, plus the sink if present

  std::vector<CfgEdge> successors(int block) const;
  std::vector<CfgEdge> predecessors(int block) const;
  /// Successor along an edge of the given kind, or -1.
  int successor(int block, EdgeKind kind) const;
  /// The single Goto successor (Fallthrough or LoopBack), or -1.
  int next(int block) const;
  bool is_exit(int block) const;
};

/// Partitions the body into maximal straight-line blocks. `while` produces a
/// dedicated guard block whose body returns over a loop-back edge; unreachable
/// code after a return is dropped.
Cfg build_cfg(const FunctionDecl& f);

std::string cfg_to_dot(const Cfg& cfg);

}  // namespace shardsym
