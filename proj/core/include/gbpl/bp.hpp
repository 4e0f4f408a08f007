#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gbpl/geometry.hpp"
#include "gbpl/network.hpp"

namespace gbpl {

/// A node's Gaussian position belief. Anchors carry a point mass at `mean`;
/// their covariance is ignored and treated as zero.
struct GaussianBelief {
  Vec2 mean = Vec2::Zero();
  Mat2 covariance = Mat2::Identity();
  bool is_anchor = false;

  static GaussianBelief anchor_at(const Position& p) { return {p, Mat2::Zero(), true}; }
};

/// Factor-to-variable message N(mean, covariance).
struct BeliefMessage {
  Vec2 mean = Vec2::Zero();
  Mat2 covariance = Mat2::Identity();
};

struct BpConfig {
  /// Prior variance scale in m^2; 0 selects max(1e4, 2 sigma2 lambda_max).
  double alpha = 0.0;
  double sigma2 = 3.0;
  double tol = 1e-4;
  int max_iters = 100;
  GeometryTolerances geometry{};
};

inline constexpr double kMinAlpha = 1e4;

/// Beliefs of every node, indexed by NodeId.
using BeliefMap = std::vector<GaussianBelief>;

GaussianBelief init_belief(std::size_t neighbor_count, double alpha);

BeliefMessage compute_message(const GaussianBelief& sender, const EdgeConstraint& edge,
                              double sigma2);

/// Adds 1e-9 * trace(W)/2 * I when W is ill-conditioned (cond > 1e12) or
/// not positive definite.
Mat2 regularize_covariance(const Mat2& w);

/// Precision-weighted product of Gaussian messages.
GaussianBelief fuse_messages(std::span<const BeliefMessage> incoming);

bool has_converged(const BeliefMap& prev, const BeliefMap& curr, double tol);

/// The alpha actually used: `config.alpha` if set (validated against
/// 2 sigma2 lambda_max), otherwise max(1e4, 2 sigma2 lambda_max).
double resolve_alpha(const EdgeConstraints& edges, const BpConfig& config);

/// Initial beliefs of every node: the anchor's point mass, N(0, alpha I) or
/// N(0, 1.5 alpha I) for nodes with a single neighbor.
BeliefMap initial_beliefs(const LocalizationProblem& problem, double alpha);

/// One node's round update from its neighbors' previous-round beliefs.
/// `neighbor_beliefs[k]` belongs to `neighbors[k]`.
GaussianBelief update_belief(NodeId node, std::span<const NodeId> neighbors,
                             std::span<const GaussianBelief> neighbor_beliefs,
                             const EdgeConstraints& edges, double sigma2);

struct BpHistory {
  std::vector<BeliefMap> iterations;  ///< [0] holds the initial beliefs
  bool converged = false;
  double alpha = 0.0;

  const BeliefMap& final() const { return iterations.back(); }
  std::vector<Position> estimates() const;
};

/// Synchronous broadcast rounds until the largest mean displacement drops
/// below `config.tol` or `config.max_iters` rounds have run.
BpHistory run_sync_rounds(const LocalizationProblem& problem, const BpConfig& config);

}  // namespace gbpl
