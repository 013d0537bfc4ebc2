#pragma once

#include <string>
#include <vector>

#include "shardsym/frontend/parser.hpp"

namespace shardsym {

struct CallEdge {
  std::string caller;
  std::string callee;
  int site = 0;

  bool operator==(const CallEdge&) const = default;
  auto operator<=>(const CallEdge&) const = default;
};

struct CallGraph {
  std::vector<std::string> nodes;   // program order
  std::vector<CallEdge> edges;

  std::vector<CallEdge> calls_from(const std::string& f) const;
};

/// One edge per syntactic call expression; builtins are not functions here.
CallGraph build_call_graph(const TypedProgram& p);

using Component = std::vector<std::string>;

/// Strongly-connected components, callees before callers. Components are
/// layered by their height in the condensed graph (leaves first, main last);
/// ties keep program order.
std::vector<Component> bottom_up_order(const CallGraph& cg);

std::string callgraph_to_dot(const CallGraph& cg);

}  // namespace shardsym
