#include "gbpl/network.hpp"

#include <queue>
#include <string>

#include "gbpl/error.hpp"

namespace gbpl {

std::vector<std::vector<NodeId>> LocalizationProblem::neighbors() const {
  std::vector<std::vector<NodeId>> out(node_count);
  // map order is (from, to), so each list comes out sorted by sender
  for (const auto& [edge, constraint] : edges) {
    if (edge.to < node_count) out[edge.to].push_back(edge.from);
  }
  return out;
}

void LocalizationProblem::validate() const {
  if (anchor >= node_count) {
    throw Error(ErrorCode::InvalidScenario, "anchor index out of range");
  }
  for (const auto& [edge, constraint] : edges) {
    if (edge.from >= node_count || edge.to >= node_count || edge.from == edge.to) {
      throw Error(ErrorCode::InvalidScenario, "edge " + std::to_string(edge.from) + "->" +
                                                  std::to_string(edge.to) + " is invalid");
    }
    if (!edges.contains(edge.reversed())) {
      throw Error(ErrorCode::InvalidScenario, "edge " + std::to_string(edge.from) + "->" +
                                                  std::to_string(edge.to) +
                                                  " has no reverse direction");
    }
  }
  const auto adj = neighbors();
  std::vector<bool> seen(node_count, false);
  std::queue<NodeId> frontier;
  frontier.push(anchor);
  seen[anchor] = true;
  while (!frontier.empty()) {
    const NodeId n = frontier.front();
    frontier.pop();
    for (NodeId m : adj[n]) {
      if (!seen[m]) {
        seen[m] = true;
        frontier.push(m);
      }
    }
  }
  for (NodeId n = 0; n < node_count; ++n) {
    if (!seen[n]) {
      throw Error(ErrorCode::UnreachableNode,
                  "node " + std::to_string(n) + " is not connected to the anchor");
    }
  }
}

}  // namespace gbpl
