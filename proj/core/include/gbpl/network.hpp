#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <vector>

#include "gbpl/geometry.hpp"

namespace gbpl {

using NodeId = std::size_t;

/// A link seen from one end: measurements received by `to`, sent by `from`.
/// The associated constraint estimates s_to - s_from.
struct DirectedEdge {
  NodeId from = 0;
  NodeId to = 0;

  DirectedEdge reversed() const { return {to, from}; }
  auto operator<=>(const DirectedEdge&) const = default;
};

using EdgeConstraints = std::map<DirectedEdge, EdgeConstraint>;

/// Everything a localization run needs: node count, the anchor and the
/// per-directed-edge constraints built from (noisy) measurements.
struct LocalizationProblem {
  std::size_t node_count = 0;
  NodeId anchor = 0;
  Position anchor_position = Position::Zero();
  EdgeConstraints edges;

  /// Sorted incoming neighbor lists, one per node.
  std::vector<std::vector<NodeId>> neighbors() const;

  /// Throws InvalidScenario on dangling or one-directional edges and
  /// UnreachableNode when some node has no path to the anchor.
  void validate() const;
};

}  // namespace gbpl
