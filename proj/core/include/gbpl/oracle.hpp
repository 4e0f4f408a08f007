#pragma once

#include <vector>

#include <Eigen/Core>

#include "gbpl/network.hpp"

namespace gbpl {

/// Whole-network linear least-squares solution with the anchor fixed.
struct JointSolution {
  std::vector<Position> positions;
  double residual_norm = 0.0;
  double normal_matrix_condition = 0.0;
};

/// Every scalar row of every directed-edge constraint stacked over the
/// non-anchor coordinates (node n occupies columns 2k, 2k+1 where k is its
/// rank among non-anchor nodes).
struct StackedSystem {
  Eigen::MatrixXd design;
  Eigen::VectorXd rhs;
  std::vector<NodeId> unknowns;
};

StackedSystem stack_rows(const LocalizationProblem& problem);

/// Unit-weight least squares over all rows; the exact joint MAP of the
/// linear-Gaussian model. Throws RankDeficientSystem with the null-space
/// dimension when the unknowns are not all determined.
JointSolution joint_ls_solve(const LocalizationProblem& problem);

struct GridBounds {
  double x_min = -10.0;
  double x_max = 10.0;
  double y_min = -10.0;
  double y_max = 10.0;
};

/// Exhaustive argmax of the joint Gaussian log-density over a grid product,
/// for at most two unknown nodes (TooManyUnknowns otherwise).
std::vector<Position> grid_map(const LocalizationProblem& problem, double grid_step,
                               const GridBounds& bounds);

}  // namespace gbpl
