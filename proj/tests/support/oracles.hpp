#pragma once

// Independent reference computations used only by the tests. None of these
// share code with the library routines they check.

#include <cmath>
#include <numbers>
#include <utility>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "gbpl/error.hpp"
#include "gbpl/geometry.hpp"

namespace gbpl::testing {

#define EXPECT_GBPL_ERROR(stmt, expected)                                      \
  do {                                                                         \
    try {                                                                      \
      stmt;                                                                    \
      ADD_FAILURE() << "expected " << ::gbpl::to_string(expected);             \
    } catch (const ::gbpl::Error& gbpl_err_) {                                 \
      EXPECT_EQ(gbpl_err_.code(), expected) << gbpl_err_.what();               \
    }                                                                          \
  } while (0)

inline double bearing_of(const Eigen::Vector2d& v) {
  double a = std::atan2(v.y(), v.x());
  if (a < 0) a += 2 * std::numbers::pi;
  return a;
}

struct BouncePath {
  Eigen::Vector2d hit;
  double length = 0;
  double bearing_from_i = 0;  // towards the hit point
  double bearing_from_j = 0;
};

// Reflection point on the line {p0 + t*dir} between two nodes on the same
// side, found from the law of reflection (equal incidence angles) by
// bisection on t. No mirror image involved.
inline BouncePath snell_bounce(const Eigen::Vector2d& s_i, const Eigen::Vector2d& s_j,
                               const Eigen::Vector2d& p0, const Eigen::Vector2d& dir) {
  const Eigen::Vector2d u = dir.normalized();
  auto f = [&](double t) {
    const Eigen::Vector2d p = p0 + t * u;
    return (p - s_i).normalized().dot(u) + (p - s_j).normalized().dot(u);
  };
  double lo = std::min((s_i - p0).dot(u), (s_j - p0).dot(u)) - 1.0;
  double hi = std::max((s_i - p0).dot(u), (s_j - p0).dot(u)) + 1.0;
  // f increases along the line
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0 ? lo : hi) = mid;
  }
  BouncePath out;
  out.hit = p0 + 0.5 * (lo + hi) * u;
  out.length = (out.hit - s_i).norm() + (out.hit - s_j).norm();
  out.bearing_from_i = bearing_of(out.hit - s_i);
  out.bearing_from_j = bearing_of(out.hit - s_j);
  return out;
}

inline Eigen::MatrixXd reference_pinv(const Eigen::MatrixXd& g) {
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(g);
  cod.setThreshold(1e-10);
  return cod.pseudoInverse();
}

// Cramer's rule, nothing else.
inline Eigen::Vector2d solve2x2(const Eigen::Matrix2d& a, const Eigen::Vector2d& b) {
  const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  return {(b(0) * a(1, 1) - a(0, 1) * b(1)) / det, (a(0, 0) * b(1) - b(0) * a(1, 0)) / det};
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace gbpl::testing
