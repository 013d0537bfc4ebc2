#include "shardsym/graphs/callgraph.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>

namespace shardsym {

std::vector<CallEdge> CallGraph::calls_from(const std::string& f) const {
  std::vector<CallEdge> out;
  for (const auto& e : edges)
    if (e.caller == f) out.push_back(e);
  return out;
}

namespace {

void collect_calls(const Expr& e, const std::string& caller, std::vector<CallEdge>& out) {
  for (const auto& k : e.kids) collect_calls(*k, caller, out);
  if (e.kind == ExprKind::Call) out.push_back({caller, e.text, e.site});
}

void collect_calls(const Block& b, const std::string& caller, std::vector<CallEdge>& out) {
  for (const auto& s : b) {
    if (s->target) collect_calls(*s->target, caller, out);
    if (s->value) collect_calls(*s->value, caller, out);
    collect_calls(s->then_block, caller, out);
    collect_calls(s->else_block, caller, out);
  }
}

}  // namespace

CallGraph build_call_graph(const TypedProgram& p) {
  CallGraph cg;
  for (const auto& f : p.program().functions) {
    cg.nodes.push_back(f.name);
    std::vector<CallEdge> calls;
    collect_calls(f.body, f.name, calls);
    std::sort(calls.begin(), calls.end(), [](const CallEdge& a, const CallEdge& b) { return a.site < b.site; });
    cg.edges.insert(cg.edges.end(), calls.begin(), calls.end());
  }
  return cg;
}

std::vector<Component> bottom_up_order(const CallGraph& cg) {
  const int n = static_cast<int>(cg.nodes.size());
  std::map<std::string, int> index_of;
  for (int i = 0; i < n; ++i) index_of[cg.nodes[i]] = i;
  std::vector<std::vector<int>> succ(n);
  for (const auto& e : cg.edges) succ[index_of.at(e.caller)].push_back(index_of.at(e.callee));

  // Tarjan.
  std::vector<int> idx(n, -1), low(n, 0), comp(n, -1);
  std::vector<bool> on_stack(n, false);
  std::vector<int> stack;
  int counter = 0, ncomp = 0;
  std::function<void(int)> strongconnect = [&](int v) {
    idx[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (int w : succ[v]) {
      if (idx[w] < 0) {
        strongconnect(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], idx[w]);
      }
    }
    if (low[v] == idx[v]) {
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = ncomp;
      } while (w != v);
      ++ncomp;
    }
  };
  for (int v = 0; v < n; ++v)
    if (idx[v] < 0) strongconnect(v);

  // Tarjan numbers components callees-first, so heights can be filled in order.
  std::vector<int> height(ncomp, 0);
  for (int c = 0; c < ncomp; ++c)
    for (int v = 0; v < n; ++v)
      if (comp[v] == c)
        for (int w : succ[v])
          if (comp[w] != c) height[c] = std::max(height[c], height[comp[w]] + 1);

  std::vector<Component> members(ncomp);
  std::vector<int> first(ncomp, n);
  for (int v = 0; v < n; ++v) {
    members[comp[v]].push_back(cg.nodes[v]);
    first[comp[v]] = std::min(first[comp[v]], v);
  }
  std::vector<int> order(ncomp);
  for (int c = 0; c < ncomp; ++c) order[c] = c;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (height[a] != height[b]) return height[a] < height[b];
    return first[a] < first[b];
  });
  std::vector<Component> out;
  for (int c : order) out.push_back(members[c]);
  return out;
}

std::string callgraph_to_dot(const CallGraph& cg) {
  std::ostringstream os;
  os << "digraph callgraph {\n";
  for (const auto& n : cg.nodes) os << "  \"" << n << "\";\n";
  for (const auto& e : cg.edges) os << "  \"" << e.caller << "\" -> \"" << e.callee << "\" [label=\"" << e.site << "\"];\n";
  os << "}\n";
  return os.str();
}

}  // namespace shardsym
