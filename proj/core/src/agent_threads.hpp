#pragma once

#include <exception>
#include <functional>
#include <memory>
#include <vector>

#include "gbpl/agents.hpp"

namespace gbpl::detail {

/// Runs every agent on its own thread. After all threads join, the failure
/// from the earliest round is rethrown (hard errors before timeouts).
/// `on_failure` runs once on the first hard error so the caller can unblock
/// the survivors.
BeliefHistory run_agent_threads(const std::vector<AgentSetup>& setups,
                                const std::vector<std::unique_ptr<Endpoint>>& endpoints,
                                int rounds, const std::function<void()>& on_failure);

}  // namespace gbpl::detail
