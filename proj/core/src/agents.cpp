#include "gbpl/agents.hpp"

#include <algorithm>
#include <condition_variable>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <tuple>

#include "agent_threads.hpp"
#include "gbpl/error.hpp"

namespace gbpl {

std::vector<AgentSetup> make_agent_setups(const LocalizationProblem& problem, double sigma2,
                                          double alpha) {
  problem.validate();
  const BeliefMap initial = initial_beliefs(problem, alpha);
  const auto adj = problem.neighbors();
  std::vector<AgentSetup> setups(problem.node_count);
  for (NodeId n = 0; n < problem.node_count; ++n) {
    AgentSetup& s = setups[n];
    s.id = n;
    s.is_anchor = n == problem.anchor;
    s.neighbors = adj[n];
    s.initial = initial[n];
    s.sigma2 = sigma2;
    for (NodeId j : adj[n]) s.incoming.emplace(DirectedEdge{j, n}, problem.edges.at({j, n}));
  }
  return setups;
}

std::vector<GaussianBelief> run_agent(const AgentSetup& setup, Endpoint& endpoint, int rounds) {
  std::vector<GaussianBelief> history{setup.initial};
  std::vector<GaussianBelief> received(setup.neighbors.size());
  for (int round = 1; round <= rounds; ++round) {
    const auto tag = static_cast<std::uint32_t>(round - 1);
    const auto frames = endpoint.exchange(tag, encode_belief_frame(setup.id, tag, history.back()));
    for (std::size_t k = 0; k < frames.size(); ++k) {
      const DecodedBelief d = decode_belief_frame(frames[k]);
      if (d.sender != setup.neighbors[k] || d.iteration != tag) {
        throw Error(ErrorCode::InvalidScenario,
                    "agent " + std::to_string(setup.id) + " got a frame from " +
                        std::to_string(d.sender) + "/" + std::to_string(d.iteration) +
                        " in the slot of " + std::to_string(setup.neighbors[k]) + "/" +
                        std::to_string(tag));
      }
      received[k] = d.belief;
    }
    if (setup.is_anchor) {
      history.push_back(history.back());
      continue;
    }
    try {
      history.push_back(
          update_belief(setup.id, setup.neighbors, received, setup.incoming, setup.sigma2));
    } catch (const Error& e) {
      throw Error(e.code(), "node " + std::to_string(setup.id) + " iteration " +
                                std::to_string(round) + ": " + e.detail());
    }
  }
  endpoint.finish();
  return history;
}

namespace detail {

namespace {

// Remembers the last round an agent reached so failures can be ranked.
class ProgressEndpoint : public Endpoint {
 public:
  explicit ProgressEndpoint(Endpoint& inner) : inner_(inner) {}
  std::vector<Frame> exchange(std::uint32_t iteration, const Frame& own) override {
    reached = iteration;
    return inner_.exchange(iteration, own);
  }
  void finish() override { inner_.finish(); }
  std::uint32_t reached = 0;

 private:
  Endpoint& inner_;
};

struct Failure {
  std::exception_ptr error;
  bool timeout = false;
  std::uint32_t round = 0;
  std::size_t agent = 0;
};

}  // namespace

BeliefHistory run_agent_threads(const std::vector<AgentSetup>& setups,
                                const std::vector<std::unique_ptr<Endpoint>>& endpoints,
                                int rounds, const std::function<void()>& on_failure) {
  std::vector<std::vector<GaussianBelief>> per_agent(setups.size());
  std::mutex error_mutex;
  std::vector<Failure> failures;
  bool aborted = false;
  {
    std::vector<std::jthread> threads;
    threads.reserve(setups.size());
    for (std::size_t k = 0; k < setups.size(); ++k) {
      threads.emplace_back([&, k] {
        ProgressEndpoint ep(*endpoints[k]);
        Failure f{nullptr, false, 0, k};
        try {
          per_agent[k] = run_agent(setups[k], ep, rounds);
          return;
        } catch (const Error& e) {
          f.error = std::current_exception();
          f.timeout = e.code() == ErrorCode::RoundTimeout;
        } catch (...) {
          f.error = std::current_exception();
        }
        f.round = ep.reached;
        std::lock_guard lock(error_mutex);
        failures.push_back(f);
        // a timeout stalls its neighbors, which time out on their own; let
        // them, so the earliest stall can be reported
        if (!f.timeout && !aborted) {
          aborted = true;
          on_failure();
        }
      });
    }
  }
  if (!failures.empty()) {
    const auto root = std::min_element(failures.begin(), failures.end(), [](const Failure& a, const Failure& b) {
      return std::tuple(a.timeout, a.round, a.agent) < std::tuple(b.timeout, b.round, b.agent);
    });
    std::rethrow_exception(root->error);
  }

  BeliefHistory history(static_cast<std::size_t>(rounds) + 1, BeliefMap(setups.size()));
  for (std::size_t n = 0; n < setups.size(); ++n) {
    for (std::size_t r = 0; r < history.size(); ++r) history[r][n] = per_agent[n][r];
  }
  return history;
}

}  // namespace detail

namespace {

struct Aborted {};

/// Mailbox keyed by (receiver, sender, iteration) plus a reusable round
/// barrier. `abort()` wakes every waiter.
class InProcessHub {
 public:
  explicit InProcessHub(std::size_t parties) : parties_(parties) {}

  void post(NodeId receiver, NodeId sender, std::uint32_t iteration, const Frame& frame) {
    {
      std::lock_guard lock(mutex_);
      mailbox_[{receiver, sender, iteration}] = frame;
    }
    cv_.notify_all();
  }

  Frame take(NodeId receiver, NodeId sender, std::uint32_t iteration) {
    std::unique_lock lock(mutex_);
    const auto key = std::make_tuple(receiver, sender, iteration);
    cv_.wait(lock, [&] { return aborted_ || mailbox_.contains(key); });
    if (aborted_) throw Aborted{};
    auto node = mailbox_.extract(key);
    return node.mapped();
  }

  void arrive_and_wait() {
    std::unique_lock lock(mutex_);
    const std::size_t generation = generation_;
    if (++arrived_ == parties_) {
      arrived_ = 0;
      ++generation_;
      cv_.notify_all();
      return;
    }
    cv_.wait(lock, [&] { return aborted_ || generation_ != generation; });
    if (aborted_) throw Aborted{};
  }

  void abort() {
    {
      std::lock_guard lock(mutex_);
      aborted_ = true;
    }
    cv_.notify_all();
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::map<std::tuple<NodeId, NodeId, std::uint32_t>, Frame> mailbox_;
  std::size_t parties_;
  std::size_t arrived_ = 0;
  std::size_t generation_ = 0;
  bool aborted_ = false;
};

class InProcessEndpoint final : public Endpoint {
 public:
  InProcessEndpoint(InProcessHub& hub, NodeId id, std::vector<NodeId> neighbors)
      : hub_(hub), id_(id), neighbors_(std::move(neighbors)) {}

  std::vector<Frame> exchange(std::uint32_t iteration, const Frame& own) override {
    for (NodeId n : neighbors_) hub_.post(n, id_, iteration, own);
    std::vector<Frame> frames;
    frames.reserve(neighbors_.size());
    for (NodeId n : neighbors_) frames.push_back(hub_.take(id_, n, iteration));
    hub_.arrive_and_wait();
    return frames;
  }

 private:
  InProcessHub& hub_;
  NodeId id_;
  std::vector<NodeId> neighbors_;
};

}  // namespace

BeliefHistory run_agents_in_process(const LocalizationProblem& problem, const BpConfig& config,
                                    int rounds) {
  if (rounds < 1) throw Error(ErrorCode::InvalidConfig, "rounds must be >= 1");
  const double alpha = resolve_alpha(problem.edges, config);
  const auto setups = make_agent_setups(problem, config.sigma2, alpha);
  InProcessHub hub(setups.size());
  std::vector<std::unique_ptr<Endpoint>> endpoints;
  for (const auto& s : setups) {
    endpoints.push_back(std::make_unique<InProcessEndpoint>(hub, s.id, s.neighbors));
  }
  try {
    return detail::run_agent_threads(setups, endpoints, rounds, [&] { hub.abort(); });
  } catch (const Aborted&) {
    throw Error(ErrorCode::NumericalFailure, "in-process run aborted");
  }
}

}  // namespace gbpl
