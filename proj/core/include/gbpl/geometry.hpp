#pragma once

// Single-bounce measurement geometry.
//
// Angle convention: every angle is an absolute bearing in a shared global
// frame, counterclockwise from +x, normalized to [0, 2*pi). For a path
// received by node i and sent by node j:
//   aoa_at_receiver = bearing at i towards the point the signal arrives from
//   aoa_at_sender   = bearing at j towards the point the signal leaves for
// and the noiseless range satisfies
//   range = steering_vector(aoa_at_sender, aoa_at_receiver)^T (s_i - s_j).

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace gbpl {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Position = Eigen::Vector2d;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Wraps an angle into [0, 2*pi).
double normalize_angle(double radians);

/// Wraps an angle difference into (-pi, pi].
double wrap_difference(double radians);

struct PathMeasurement {
  double range = 0.0;            ///< full path length, meters
  double aoa_at_receiver = 0.0;  ///< radians
  double aoa_at_sender = 0.0;    ///< radians

  /// The same physical path seen from the other end of the link.
  PathMeasurement reversed() const { return {range, aoa_at_sender, aoa_at_receiver}; }
};

enum class PathClass { SingleBounce, LineOfSight, Degenerate };

struct GeometryTolerances {
  double eps_los = deg_to_rad(1.0);  ///< LOS detection band around |dtheta| = pi
  double eps_sing = 1e-6;            ///< |sin(dtheta)| at or below this is singular
  double rank_tol = 1e-9;            ///< s_min >= rank_tol * s_max  =>  rank 2
};

/// g(theta_ij, theta_ji). Throws SingularGeometry when the two rays are
/// (anti)parallel, i.e. |sin(theta_ji - theta_ij)| <= eps_sing.
Vec2 steering_vector(double theta_ij, double theta_ji, double eps_sing = 1e-6);

PathClass classify_path(const PathMeasurement& m, double eps_los = deg_to_rad(1.0),
                        double eps_sing = 1e-6);

/// Rank-2 replacement for the LOS case: s_i - s_j = range * u(aoa_at_sender).
struct LosRows {
  Mat2 geometry = Mat2::Identity();
  Vec2 rhs = Vec2::Zero();
};

LosRows los_rows(const PathMeasurement& m, double eps_los = deg_to_rad(1.0));

/// Fused per-link constraint s_to - s_from ~ N(offset, sigma^2 * basis).
struct EdgeConstraint {
  Eigen::MatrixX2d geometry;        ///< G, one row per scalar constraint
  Eigen::VectorXd rhs;              ///< d, stacked ranges (and LOS offsets)
  Eigen::Matrix2Xd pseudo_inverse;  ///< G^+
  Vec2 offset = Vec2::Zero();       ///< G^+ d
  Mat2 basis = Mat2::Zero();        ///< G^+ (G^+)^T
  std::size_t path_count = 0;       ///< paths that contributed rows
  int rank = 0;
  std::vector<std::size_t> dropped_paths;  ///< indices of degenerate inputs

  /// Largest eigenvalue of `basis`.
  double basis_max_eigenvalue() const;
};

/// Numerical rank of an R x 2 matrix under the given relative tolerance.
int numerical_rank(const Eigen::MatrixX2d& g, double rank_tol = 1e-9);

/// Moore-Penrose pseudo-inverse of a tall or single-row R x 2 matrix using
/// the closed forms (G^T G)^-1 G^T (rank 2, via QR) and G^T (G G^T)^-1 (one row).
/// A multi-row rank-1 matrix uses G^T / ||G||_F^2. Throws RankDeficient on
/// a zero matrix.
Eigen::Matrix2Xd pseudo_inverse(const Eigen::MatrixX2d& g, double rank_tol = 1e-9);

EdgeConstraint build_edge_constraint(std::span<const PathMeasurement> paths,
                                     const GeometryTolerances& tol = {});

}  // namespace gbpl
