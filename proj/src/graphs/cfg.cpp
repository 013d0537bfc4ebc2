#include "shardsym/graphs/cfg.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace shardsym {

const char* to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::Fallthrough: return "fallthrough";
    case EdgeKind::TrueBranch: return "true";
    case EdgeKind::FalseBranch: return "false";
    case EdgeKind::LoopBack: return "loop-back";
  }
  return "?";
}

std::vector<CfgEdge> Cfg::successors(int block) const {
  std::vector<CfgEdge> out;
  for (const auto& e : edges)
    if (e.from == block) out.push_back(e);
  return out;
}

std::vector<CfgEdge> Cfg::predecessors(int block) const {
  std::vector<CfgEdge> out;
  for (const auto& e : edges)
    if (e.to == block) out.push_back(e);
  return out;
}

int Cfg::successor(int block, EdgeKind kind) const {
  for (const auto& e : edges)
    if (e.from == block && e.kind == kind) return e.to;
  return -1;
}

int Cfg::next(int block) const {
  for (const auto& e : edges)
    if (e.from == block && (e.kind == EdgeKind::Fallthrough || e.kind == EdgeKind::LoopBack)) return e.to;
  return -1;
}

bool Cfg::is_exit(int block) const { return std::find(exits.begin(), exits.end(), block) != exits.end(); }

namespace {

class Builder {
public:
  explicit Builder(const FunctionDecl& f) { cfg_.function = f.name; }

  Cfg run(const FunctionDecl& f) {
    int entry = fresh(f.loc);
    int end = build(f.body, entry);
    if (end >= 0) {
      blocks()[end].term = Terminator::Return;
      blocks()[end].ret = nullptr;
    }
    add_sink();
    merge_straight_lines();
    prune_and_renumber();
    return std::move(cfg_);
  }

private:
  std::vector<BasicBlock>& blocks() { return cfg_.blocks; }

  int fresh(SourceLoc loc) {
    BasicBlock b;
    b.id = static_cast<int>(blocks().size());
    b.loc = loc;
    blocks().push_back(std::move(b));
    return blocks().back().id;
  }

  void edge(int from, int to, EdgeKind kind) { cfg_.edges.push_back({from, to, kind}); }

  void jump(int from, int to, EdgeKind kind = EdgeKind::Fallthrough) {
    blocks()[from].term = Terminator::Goto;
    edge(from, to, kind);
  }

  // Returns the block where control continues, or -1 when every path returned.
  int build(const Block& body, int cur) {
    for (const auto& sp : body) {
      if (cur < 0) break;
      const Stmt& s = *sp;
      switch (s.kind) {
        case StmtKind::Let:
        case StmtKind::Assign:
        case StmtKind::Free:
        case StmtKind::ExprStmt:
          if (blocks()[cur].stmts.empty()) blocks()[cur].loc = s.loc;
          blocks()[cur].stmts.push_back(&s);
          break;
        case StmtKind::Return:
          blocks()[cur].term = Terminator::Return;
          blocks()[cur].ret = &s;
          cur = -1;
          break;
        case StmtKind::If: {
          blocks()[cur].term = Terminator::Branch;
          blocks()[cur].cond = s.value.get();
          int then_b = fresh(s.loc);
          edge(cur, then_b, EdgeKind::TrueBranch);
          int then_end = build(s.then_block, then_b);
          int else_end = cur;
          int else_b = -1;
          if (s.has_else) {
            else_b = fresh(s.loc);
            edge(cur, else_b, EdgeKind::FalseBranch);
            else_end = build(s.else_block, else_b);
          }
          if (then_end < 0 && (s.has_else && else_end < 0)) {
            cur = -1;
            break;
          }
          int join = fresh(s.loc);
          if (then_end >= 0) jump(then_end, join);
          if (!s.has_else) edge(cur, join, EdgeKind::FalseBranch);
          else if (else_end >= 0) jump(else_end, join);
          cur = join;
          break;
        }
        case StmtKind::While: {
          int guard = fresh(s.loc);
          jump(cur, guard);
          blocks()[guard].term = Terminator::Branch;
          blocks()[guard].cond = s.value.get();
          blocks()[guard].loop_guard = true;
          int body_b = fresh(s.loc);
          edge(guard, body_b, EdgeKind::TrueBranch);
          int body_end = build(s.then_block, body_b);
          if (body_end >= 0) jump(body_end, guard, EdgeKind::LoopBack);
          int after = fresh(s.loc);
          edge(guard, after, EdgeKind::FalseBranch);
          cur = after;
          break;
        }
      }
    }
    return cur;
  }

  void add_sink() {
    std::vector<int> returns;
    for (const auto& b : blocks())
      if (b.term == Terminator::Return && reachable_from_entry(b.id)) returns.push_back(b.id);
    if (returns.size() <= 1) return;
    int sink = fresh(blocks()[returns.back()].loc);
    blocks()[sink].term = Terminator::Exit;
    for (int r : returns) edge(r, sink, EdgeKind::Fallthrough);
  }

  bool reachable_from_entry(int target) {
    std::vector<bool> seen(blocks().size(), false);
    std::vector<int> stack = {0};
    while (!stack.empty()) {
      int b = stack.back();
      stack.pop_back();
      if (seen[b]) continue;
      seen[b] = true;
      if (b == target) return true;
      for (const auto& e : cfg_.edges)
        if (e.from == b) stack.push_back(e.to);
    }
    return false;
  }

  // Folds B into A when A jumps straight to B and B has no other predecessor.
  void merge_straight_lines() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto& a : blocks()) {
        if (a.term != Terminator::Goto) continue;
        auto out = std::find_if(cfg_.edges.begin(), cfg_.edges.end(),
                                [&](const CfgEdge& e) { return e.from == a.id && e.kind == EdgeKind::Fallthrough; });
        if (out == cfg_.edges.end()) continue;
        int b = out->to;
        if (b == 0 || b == a.id || blocks()[b].loop_guard) continue;
        int preds = static_cast<int>(std::count_if(cfg_.edges.begin(), cfg_.edges.end(), [&](const CfgEdge& e) { return e.to == b; }));
        if (preds != 1) continue;
        BasicBlock& bb = blocks()[b];
        cfg_.edges.erase(out);
        a.stmts.insert(a.stmts.end(), bb.stmts.begin(), bb.stmts.end());
        if (a.stmts.empty() || (!bb.stmts.empty() && a.stmts.size() == bb.stmts.size())) a.loc = bb.loc;
        a.term = bb.term;
        a.cond = bb.cond;
        a.ret = bb.ret;
        for (auto& e : cfg_.edges)
          if (e.from == b) e.from = a.id;
        bb.stmts.clear();
        bb.term = Terminator::Goto;
        bb.id = -1 - bb.id;  // tombstone; dropped as unreachable
        changed = true;
      }
    }
  }

  void prune_and_renumber() {
    std::vector<bool> seen(blocks().size(), false);
    std::vector<int> stack = {0};
    while (!stack.empty()) {
      int b = stack.back();
      stack.pop_back();
      if (seen[b]) continue;
      seen[b] = true;
      for (const auto& e : cfg_.edges)
        if (e.from == b) stack.push_back(e.to);
    }
    std::map<int, int> remap;
    std::vector<BasicBlock> kept;
    for (auto& b : blocks()) {
      int old = static_cast<int>(&b - blocks().data());
      if (!seen[old]) continue;
      remap[old] = static_cast<int>(kept.size());
      b.id = static_cast<int>(kept.size());
      kept.push_back(std::move(b));
    }
    std::vector<CfgEdge> edges;
    for (const auto& e : cfg_.edges)
      if (seen[e.from] && seen[e.to]) edges.push_back({remap[e.from], remap[e.to], e.kind});
    cfg_.blocks = std::move(kept);
    cfg_.edges = std::move(edges);
    cfg_.entry = 0;
    cfg_.exits.clear();
    for (const auto& b : cfg_.blocks)
      if (b.term == Terminator::Return || b.term == Terminator::Exit) cfg_.exits.push_back(b.id);
  }

  Cfg cfg_;
};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\l";
      continue;
    }
    out += c;
  }
  return out;
}

}  // namespace

Cfg build_cfg(const FunctionDecl& f) {
  Builder b(f);
  return b.run(f);
}

std::string cfg_to_dot(const Cfg& cfg) {
  std::ostringstream os;
  os << "digraph \"" << escape(cfg.function) << "\" {\n  node [shape=box, fontname=monospace];\n";
  for (const auto& b : cfg.blocks) {
    std::string label;
    for (const Stmt* s : b.stmts) label += statement_text(*s) + "\n";
    switch (b.term) {
      case Terminator::Branch: label += (b.loop_guard ? "while (" : "if (") + pretty_print(*b.cond) + ")\n"; break;
      case Terminator::Return: label += b.ret ? statement_text(*b.ret) + "\n" : "return;\n"; break;
      case Terminator::Exit: label += "exit\n"; break;
      case Terminator::Goto: break;
    }
    if (label.empty()) label = "(empty)\n";
    os << "  b" << b.id << " [label=\"B" << b.id << "\\l" << escape(label) << "\"];\n";
  }
  for (const auto& e : cfg.edges) {
    os << "  b" << e.from << " -> b" << e.to;
    if (e.kind != EdgeKind::Fallthrough) os << " [label=\"" << to_string(e.kind) << "\"]";
    os << ";\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace shardsym
