#include "gbpl/bp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>

#include "gbpl/error.hpp"

namespace gbpl {
namespace {

struct SymEig {
  double min;
  double max;
};

SymEig symmetric_eigenvalues(const Mat2& m) {
  const double a = m(0, 0), b = 0.5 * (m(0, 1) + m(1, 0)), c = m(1, 1);
  const double mean = 0.5 * (a + c);
  const double radius = std::hypot(0.5 * (a - c), b);
  return {mean - radius, mean + radius};
}

Mat2 symmetrized(const Mat2& m) { return 0.5 * (m + m.transpose()); }

bool all_finite(const Mat2& m) { return m.allFinite(); }

}  // namespace

GaussianBelief init_belief(std::size_t neighbor_count, double alpha) {
  if (neighbor_count == 0) {
    throw Error(ErrorCode::IsolatedNode, "node has no neighbors");
  }
  if (!(alpha > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "alpha must be positive");
  }
  const double scale = neighbor_count > 1 ? alpha : 1.5 * alpha;
  return {Vec2::Zero(), scale * Mat2::Identity(), false};
}

BeliefMessage compute_message(const GaussianBelief& sender, const EdgeConstraint& edge,
                              double sigma2) {
  BeliefMessage msg;
  msg.mean = sender.mean + edge.offset;
  msg.covariance = sigma2 * edge.basis;
  if (!sender.is_anchor) msg.covariance += sender.covariance;
  return msg;
}

Mat2 regularize_covariance(const Mat2& w) {
  const Mat2 sym = symmetrized(w);
  const auto [lo, hi] = symmetric_eigenvalues(sym);
  if (lo > 0.0 && hi / lo <= 1e12) return sym;
  const double trace = sym.trace();
  if (!(trace > 0.0) || !std::isfinite(trace)) {
    throw Error(ErrorCode::NumericalFailure, "message covariance has non-positive trace");
  }
  return sym + (1e-9 * trace / 2.0) * Mat2::Identity();
}

GaussianBelief fuse_messages(std::span<const BeliefMessage> incoming) {
  if (incoming.empty()) {
    throw Error(ErrorCode::NoMessages, "cannot fuse an empty message set");
  }
  if (incoming.size() == 1) {
    return {incoming.front().mean, regularize_covariance(incoming.front().covariance), false};
  }

  Mat2 precision = Mat2::Zero();
  Vec2 info = Vec2::Zero();
  for (const BeliefMessage& msg : incoming) {
    const Mat2 w = regularize_covariance(msg.covariance);
    const Mat2 w_inv = w.inverse();
    if (!all_finite(w_inv)) {
      throw Error(ErrorCode::NumericalFailure, "message covariance is not invertible");
    }
    precision += w_inv;
    info += w_inv * msg.mean;
  }
  const Mat2 cov = symmetrized(precision.inverse());
  const Vec2 mean = cov * info;
  if (!all_finite(cov) || !mean.allFinite()) {
    throw Error(ErrorCode::NumericalFailure, "fused precision is singular");
  }
  return {mean, cov, false};
}

bool has_converged(const BeliefMap& prev, const BeliefMap& curr, double tol) {
  if (prev.size() != curr.size()) {
    throw Error(ErrorCode::MismatchedNodeSets,
                std::to_string(prev.size()) + " vs " + std::to_string(curr.size()) + " nodes");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < prev.size(); ++i) {
    worst = std::max(worst, (curr[i].mean - prev[i].mean).norm());
  }
  return worst < tol;
}

double resolve_alpha(const EdgeConstraints& edges, const BpConfig& config) {
  double lambda_max = 0.0;
  for (const auto& [edge, constraint] : edges) {
    lambda_max = std::max(lambda_max, constraint.basis_max_eigenvalue());
  }
  const double required = 2.0 * config.sigma2 * lambda_max;
  if (config.alpha == 0.0) return std::max(kMinAlpha, required);
  if (!(config.alpha >= required)) {
    throw Error(ErrorCode::InvalidConfig, "alpha " + std::to_string(config.alpha) +
                                              " is below 2*sigma2*lambda_max = " +
                                              std::to_string(required));
  }
  return config.alpha;
}

BeliefMap initial_beliefs(const LocalizationProblem& problem, double alpha) {
  const auto adj = problem.neighbors();
  BeliefMap beliefs(problem.node_count);
  for (NodeId n = 0; n < problem.node_count; ++n) {
    if (n == problem.anchor) {
      beliefs[n] = GaussianBelief::anchor_at(problem.anchor_position);
      continue;
    }
    try {
      beliefs[n] = init_belief(adj[n].size(), alpha);
    } catch (const Error& e) {
      throw Error(e.code(), "node " + std::to_string(n) + ": " + e.detail());
    }
  }
  return beliefs;
}

GaussianBelief update_belief(NodeId node, std::span<const NodeId> neighbors,
                             std::span<const GaussianBelief> neighbor_beliefs,
                             const EdgeConstraints& edges, double sigma2) {
  std::vector<BeliefMessage> messages;
  messages.reserve(neighbors.size());
  for (std::size_t k = 0; k < neighbors.size(); ++k) {
    const auto it = edges.find({neighbors[k], node});
    if (it == edges.end()) {
      throw Error(ErrorCode::InvalidScenario, "missing constraint " +
                                                  std::to_string(neighbors[k]) + "->" +
                                                  std::to_string(node));
    }
    messages.push_back(compute_message(neighbor_beliefs[k], it->second, sigma2));
  }
  return fuse_messages(messages);
}

std::vector<Position> BpHistory::estimates() const {
  std::vector<Position> out;
  out.reserve(final().size());
  for (const auto& b : final()) out.push_back(b.mean);
  return out;
}

BpHistory run_sync_rounds(const LocalizationProblem& problem, const BpConfig& config) {
  if (config.max_iters < 1 || !(config.tol > 0.0) || !(config.sigma2 > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "need max_iters >= 1, tol > 0, sigma2 > 0");
  }
  problem.validate();

  BpHistory history;
  history.alpha = resolve_alpha(problem.edges, config);
  history.iterations.push_back(initial_beliefs(problem, history.alpha));

  const auto adj = problem.neighbors();
  std::vector<GaussianBelief> gathered;
  for (int iter = 1; iter <= config.max_iters; ++iter) {
    const BeliefMap& prev = history.iterations.back();
    BeliefMap next = prev;
    for (NodeId n = 0; n < problem.node_count; ++n) {
      if (n == problem.anchor) continue;
      gathered.clear();
      for (NodeId j : adj[n]) gathered.push_back(prev[j]);
      try {
        next[n] = update_belief(n, adj[n], gathered, problem.edges, config.sigma2);
      } catch (const Error& e) {
        throw Error(e.code(), "node " + std::to_string(n) + " iteration " +
                                  std::to_string(iter) + ": " + e.detail());
      }
    }
    const bool done = has_converged(prev, next, config.tol);
    history.iterations.push_back(std::move(next));
    if (done) {
      history.converged = true;
      break;
    }
  }
  return history;
}

}  // namespace gbpl
