#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "gbpl/bp.hpp"
#include "gbpl/frame.hpp"
#include "gbpl/network.hpp"

namespace gbpl {

/// What one sensor knows: its neighbors, the constraints of the edges
/// pointing at it, and its prior. Nothing about the rest of the network.
struct AgentSetup {
  NodeId id = 0;
  bool is_anchor = false;
  std::vector<NodeId> neighbors;  ///< sorted
  EdgeConstraints incoming;       ///< only edges neighbor -> id
  GaussianBelief initial;
  double sigma2 = 3.0;
};

/// Splits a problem into per-agent local views. `alpha` must already be
/// resolved (see resolve_alpha).
std::vector<AgentSetup> make_agent_setups(const LocalizationProblem& problem, double sigma2,
                                          double alpha);

/// One agent's view of the broadcast medium.
class Endpoint {
 public:
  virtual ~Endpoint() = default;

  /// Broadcasts `own` (tagged `iteration`) to every neighbor and returns the
  /// neighbors' frames of the same iteration, in neighbor order.
  virtual std::vector<Frame> exchange(std::uint32_t iteration, const Frame& own) = 0;

  /// Called once after the last round; may linger to finish acknowledgments.
  virtual void finish() {}
};

/// Runs broadcast BP rounds for a single agent. Returns the agent's belief
/// after each round, element 0 being its initial belief.
std::vector<GaussianBelief> run_agent(const AgentSetup& setup, Endpoint& endpoint, int rounds);

/// Belief of every node at every round: history[round][node].
using BeliefHistory = std::vector<BeliefMap>;

/// Agents as threads exchanging frames through a shared mailbox, with a
/// barrier at the end of every round.
BeliefHistory run_agents_in_process(const LocalizationProblem& problem, const BpConfig& config,
                                    int rounds);

}  // namespace gbpl
