#include "gbpl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "gbpl/error.hpp"

namespace gbpl {

double normalize_angle(double radians) {
  double a = std::fmod(radians, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  // fmod of a tiny negative value can round up to exactly 2*pi
  if (a >= kTwoPi) a = 0.0;
  return a;
}

double wrap_difference(double radians) {
  double a = normalize_angle(radians);
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

Vec2 steering_vector(double theta_ij, double theta_ji, double eps_sing) {
  const double denom = std::sin(theta_ji - theta_ij);
  if (!(std::abs(denom) > eps_sing)) {
    throw Error(ErrorCode::SingularGeometry,
                "rays are parallel: sin(theta_ji - theta_ij) = " + std::to_string(denom));
  }
  return Vec2((std::sin(theta_ij) + std::sin(theta_ji)) / denom,
              -(std::cos(theta_ij) + std::cos(theta_ji)) / denom);
}

PathClass classify_path(const PathMeasurement& m, double eps_los, double eps_sing) {
  const double diff = wrap_difference(m.aoa_at_receiver - m.aoa_at_sender);
  if (std::numbers::pi - std::abs(diff) <= eps_los) return PathClass::LineOfSight;
  if (std::abs(std::sin(diff)) <= eps_sing) return PathClass::Degenerate;
  return PathClass::SingleBounce;
}

LosRows los_rows(const PathMeasurement& m, double eps_los) {
  if (classify_path(m, eps_los) != PathClass::LineOfSight) {
    throw Error(ErrorCode::NotLineOfSight, "angular difference is not within eps_los of pi");
  }
  LosRows rows;
  rows.rhs = m.range * Vec2(std::cos(m.aoa_at_sender), std::sin(m.aoa_at_sender));
  return rows;
}

double EdgeConstraint::basis_max_eigenvalue() const {
  // closed form for a symmetric 2x2
  const double a = basis(0, 0), b = 0.5 * (basis(0, 1) + basis(1, 0)), c = basis(1, 1);
  const double mean = 0.5 * (a + c);
  const double radius = std::hypot(0.5 * (a - c), b);
  return mean + radius;
}

int numerical_rank(const Eigen::MatrixX2d& g, double rank_tol) {
  if (g.rows() == 0) return 0;
  const Eigen::JacobiSVD<Eigen::MatrixX2d> svd(g);
  const auto& s = svd.singularValues();
  if (!(s(0) > 0.0) || !std::isfinite(s(0))) return 0;
  if (s.size() < 2) return 1;
  return s(1) >= rank_tol * s(0) ? 2 : 1;
}

Eigen::Matrix2Xd pseudo_inverse(const Eigen::MatrixX2d& g, double rank_tol) {
  const int rank = numerical_rank(g, rank_tol);
  if (rank == 0) {
    throw Error(ErrorCode::RankDeficient, "geometry matrix has numerical rank 0");
  }
  if (rank == 2) {
    // (G^T G)^-1 G^T, evaluated as R^-1 Q^T so the condition number is not squared
    const Eigen::Index r = g.rows();
    return g.householderQr().solve(Eigen::MatrixXd::Identity(r, r));
  }
  if (g.rows() == 1) {
    const double ggt = g.row(0).squaredNorm();
    return g.transpose() / ggt;
  }
  return g.transpose() / g.squaredNorm();
}

EdgeConstraint build_edge_constraint(std::span<const PathMeasurement> paths,
                                     const GeometryTolerances& tol) {
  std::vector<Eigen::RowVector2d> rows;
  std::vector<double> rhs;
  EdgeConstraint edge;

  for (std::size_t k = 0; k < paths.size(); ++k) {
    const PathMeasurement& m = paths[k];
    switch (classify_path(m, tol.eps_los, tol.eps_sing)) {
      case PathClass::SingleBounce:
        rows.emplace_back(steering_vector(m.aoa_at_sender, m.aoa_at_receiver, tol.eps_sing));
        rhs.push_back(m.range);
        ++edge.path_count;
        break;
      case PathClass::LineOfSight: {
        const LosRows los = los_rows(m, tol.eps_los);
        rows.emplace_back(los.geometry.row(0));
        rows.emplace_back(los.geometry.row(1));
        rhs.push_back(los.rhs(0));
        rhs.push_back(los.rhs(1));
        ++edge.path_count;
        break;
      }
      case PathClass::Degenerate:
        edge.dropped_paths.push_back(k);
        break;
    }
  }
  if (rows.empty()) {
    throw Error(ErrorCode::AllPathsDegenerate,
                "all " + std::to_string(paths.size()) + " paths dropped as degenerate");
  }

  const auto n = static_cast<Eigen::Index>(rows.size());
  edge.geometry.resize(n, 2);
  edge.rhs.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    edge.geometry.row(r) = rows[static_cast<std::size_t>(r)];
    edge.rhs(r) = rhs[static_cast<std::size_t>(r)];
  }
  edge.rank = numerical_rank(edge.geometry, tol.rank_tol);
  edge.pseudo_inverse = pseudo_inverse(edge.geometry, tol.rank_tol);
  edge.offset = edge.pseudo_inverse * edge.rhs;
  edge.basis = edge.pseudo_inverse * edge.pseudo_inverse.transpose();
  edge.basis = 0.5 * (edge.basis + edge.basis.transpose()).eval();
  return edge;
}

}  // namespace gbpl
