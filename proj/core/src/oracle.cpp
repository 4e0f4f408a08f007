#include "gbpl/oracle.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/SVD>

#include "gbpl/error.hpp"

namespace gbpl {

StackedSystem stack_rows(const LocalizationProblem& problem) {
  StackedSystem sys;
  std::vector<Eigen::Index> column(problem.node_count, -1);
  for (NodeId n = 0; n < problem.node_count; ++n) {
    if (n == problem.anchor) continue;
    column[n] = static_cast<Eigen::Index>(2 * sys.unknowns.size());
    sys.unknowns.push_back(n);
  }
  Eigen::Index rows = 0;
  for (const auto& [edge, c] : problem.edges) rows += c.geometry.rows();

  sys.design = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(2 * sys.unknowns.size()));
  sys.rhs = Eigen::VectorXd::Zero(rows);
  Eigen::Index r = 0;
  for (const auto& [edge, c] : problem.edges) {
    for (Eigen::Index k = 0; k < c.geometry.rows(); ++k, ++r) {
      const Eigen::RowVector2d g = c.geometry.row(k);
      double b = c.rhs(k);
      // g^T (s_to - s_from) = d
      if (edge.to == problem.anchor) {
        b -= g.dot(problem.anchor_position);
      } else {
        sys.design.block<1, 2>(r, column[edge.to]) += g;
      }
      if (edge.from == problem.anchor) {
        b += g.dot(problem.anchor_position);
      } else {
        sys.design.block<1, 2>(r, column[edge.from]) -= g;
      }
      sys.rhs(r) = b;
    }
  }
  return sys;
}

JointSolution joint_ls_solve(const LocalizationProblem& problem) {
  const StackedSystem sys = stack_rows(problem);
  const Eigen::Index cols = sys.design.cols();
  JointSolution sol;
  sol.positions.assign(problem.node_count, Position::Zero());
  sol.positions.at(problem.anchor) = problem.anchor_position;
  if (cols == 0) return sol;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-9);
  const Eigen::Index rank = svd.rank();
  if (rank < cols) {
    throw Error(ErrorCode::RankDeficientSystem,
                "null-space dimension " + std::to_string(cols - rank) + " over " +
                    std::to_string(cols) + " unknown coordinates");
  }
  const Eigen::VectorXd x = svd.solve(sys.rhs);
  const auto& s = svd.singularValues();
  const double ratio = s(0) / s(cols - 1);
  sol.normal_matrix_condition = ratio * ratio;
  sol.residual_norm = (sys.design * x - sys.rhs).norm();
  for (std::size_t k = 0; k < sys.unknowns.size(); ++k) {
    const auto c = static_cast<Eigen::Index>(2 * k);
    sol.positions[sys.unknowns[k]] = Position(x(c), x(c + 1));
  }
  return sol;
}

std::vector<Position> grid_map(const LocalizationProblem& problem, double grid_step,
                               const GridBounds& bounds) {
  const StackedSystem sys = stack_rows(problem);
  if (sys.unknowns.size() > 2) {
    throw Error(ErrorCode::TooManyUnknowns,
                std::to_string(sys.unknowns.size()) + " unknown nodes; grid search handles 2");
  }
  if (!(grid_step > 0.0) || !(bounds.x_max >= bounds.x_min) || !(bounds.y_max >= bounds.y_min)) {
    throw Error(ErrorCode::InvalidConfig, "grid step must be positive and bounds ordered");
  }
  std::vector<Position> grid;
  const auto nx = static_cast<int>(std::floor((bounds.x_max - bounds.x_min) / grid_step + 1e-9));
  const auto ny = static_cast<int>(std::floor((bounds.y_max - bounds.y_min) / grid_step + 1e-9));
  for (int a = 0; a <= nx; ++a) {
    for (int b = 0; b <= ny; ++b) {
      grid.emplace_back(bounds.x_min + a * grid_step, bounds.y_min + b * grid_step);
    }
  }

  std::vector<Position> out(problem.node_count, Position::Zero());
  out.at(problem.anchor) = problem.anchor_position;
  if (sys.unknowns.empty()) return out;

  // log-density up to constants: -0.5/sigma^2 * ||A x - b||^2
  Eigen::VectorXd x(sys.design.cols());
  auto log_density = [&]() { return -0.5 * (sys.design * x - sys.rhs).squaredNorm(); };

  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_idx(sys.unknowns.size(), 0);
  if (sys.unknowns.size() == 1) {
    for (std::size_t a = 0; a < grid.size(); ++a) {
      x << grid[a].x(), grid[a].y();
      const double v = log_density();
      if (v > best) {
        best = v;
        best_idx = {a};
      }
    }
  } else {
    for (std::size_t a = 0; a < grid.size(); ++a) {
      for (std::size_t b = 0; b < grid.size(); ++b) {
        x << grid[a].x(), grid[a].y(), grid[b].x(), grid[b].y();
        const double v = log_density();
        if (v > best) {
          best = v;
          best_idx = {a, b};
        }
      }
    }
  }
  for (std::size_t k = 0; k < sys.unknowns.size(); ++k) out[sys.unknowns[k]] = grid[best_idx[k]];
  return out;
}

}  // namespace gbpl
