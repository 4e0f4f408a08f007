#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "gbpl/geometry.hpp"
#include "gbpl/scenario.hpp"
#include "support/oracles.hpp"

using namespace gbpl;
using gbpl::testing::max_abs_diff;
using gbpl::testing::reference_pinv;
using std::numbers::pi;

namespace {

Eigen::MatrixX2d rows(std::initializer_list<Eigen::RowVector2d> r) {
  Eigen::MatrixX2d g(static_cast<Eigen::Index>(r.size()), 2);
  Eigen::Index k = 0;
  for (const auto& row : r) g.row(k++) = row;
  return g;
}

}  // namespace

TEST(SteeringVector, AxisPair) {
  const Vec2 g = steering_vector(0.0, pi / 2);
  EXPECT_NEAR(g.x(), 1.0, 1e-15);
  EXPECT_NEAR(g.y(), -1.0, 1e-15);
}

TEST(SteeringVector, SymmetricPair) {
  const Vec2 g = steering_vector(pi / 4, 3 * pi / 4);
  EXPECT_NEAR(g.x(), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(g.y(), 0.0, 1e-15);
}

TEST(SteeringVector, MatchesHandMirrorConstruction) {
  // S_j=(4,0) mirrored across y=2 is (4,4); |S_i - S_j'| = 4 sqrt 2
  const Vec2 g = steering_vector(3 * pi / 4, pi / 4);
  EXPECT_NEAR(g.dot(Vec2(-4.0, 0.0)), 4.0 * std::sqrt(2.0), 1e-12);
}

TEST(SteeringVector, LosIsSingular) {
  EXPECT_GBPL_ERROR(steering_vector(0.0, pi), ErrorCode::SingularGeometry);
  EXPECT_GBPL_ERROR(steering_vector(1.0, 1.0), ErrorCode::SingularGeometry);
}

TEST(SteeringVector, AntisymmetricUnderSwap) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> angle(0.0, 2 * pi);
  int checked = 0;
  for (int k = 0; k < 10000; ++k) {
    const double a = angle(gen), b = angle(gen);
    if (std::abs(std::sin(b - a)) < 1e-3) continue;
    const Vec2 ab = steering_vector(a, b), ba = steering_vector(b, a);
    ASSERT_LT((ab + ba).norm(), 1e-12 * (1.0 + ab.norm()));
    ++checked;
  }
  EXPECT_GT(checked, 9900);
}

TEST(SteeringVector, RangeIdentityOnReflectionPaths) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> coord(-10.0, 10.0), orient(0.0, pi), gap(0.2, 6.0);
  int checked = 0;
  while (checked < 2000) {
    const Position si(coord(gen), coord(gen)), sj(coord(gen), coord(gen));
    const double o = orient(gen);
    const Vec2 dir(std::cos(o), std::sin(o)), n(-std::sin(o), std::cos(o));
    const double offset = std::max(n.dot(si), n.dot(sj)) + gap(gen);
    const auto ref = gbpl::testing::snell_bounce(si, sj, offset * n, dir);
    if (std::abs(std::sin(ref.bearing_from_i - ref.bearing_from_j)) < 1e-3) continue;
    const Vec2 g = steering_vector(ref.bearing_from_j, ref.bearing_from_i);
    ASSERT_NEAR(g.dot(si - sj), ref.length, 1e-9 * (1.0 + ref.length));
    ++checked;
  }
}

TEST(NormalizeAngle, Ranges) {
  EXPECT_DOUBLE_EQ(normalize_angle(-pi / 2), 3 * pi / 2);
  EXPECT_DOUBLE_EQ(normalize_angle(5 * pi), pi);
  EXPECT_GE(normalize_angle(-1e-18), 0.0);
  EXPECT_LT(normalize_angle(-1e-18), kTwoPi);
  EXPECT_DOUBLE_EQ(wrap_difference(3 * pi / 2), -pi / 2);
  EXPECT_DOUBLE_EQ(wrap_difference(-pi), pi);
}

TEST(ClassifyPath, Examples) {
  EXPECT_EQ(classify_path({1.0, pi, 0.0}, 0.01), PathClass::LineOfSight);
  EXPECT_EQ(classify_path({1.0, 3 * pi / 4, pi / 4}), PathClass::SingleBounce);
  EXPECT_EQ(classify_path({1.0, 0.1, 0.1}), PathClass::Degenerate);
}

TEST(ClassifyPath, LosBandWrapsAroundZero) {
  // receiver at 0.2 deg, sender at 180.5 deg: difference 179.7 deg
  const PathMeasurement m{1.0, deg_to_rad(0.2), deg_to_rad(180.5)};
  EXPECT_EQ(classify_path(m), PathClass::LineOfSight);
  EXPECT_EQ(classify_path(m, deg_to_rad(0.1)), PathClass::SingleBounce);
}

TEST(LosRows, Examples) {
  struct Case {
    PathMeasurement m;
    Vec2 offset;
  };
  const Case cases[] = {
      {{5.0, pi, 0.0}, {5.0, 0.0}},
      {{5.0, 3 * pi / 2, pi / 2}, {0.0, 5.0}},
      {{4.0 * std::sqrt(2.0), 5 * pi / 4, pi / 4}, {4.0, 4.0}},
  };
  for (const auto& c : cases) {
    const LosRows r = los_rows(c.m);
    EXPECT_TRUE(r.geometry.isIdentity());
    EXPECT_LT((r.rhs - c.offset).norm(), 1e-12);
  }
}

TEST(LosRows, RejectsBouncePath) {
  EXPECT_GBPL_ERROR(los_rows({1.0, 3 * pi / 4, pi / 4}), ErrorCode::NotLineOfSight);
}

TEST(LosRows, GeneratedLosPathRecoversDifference) {
  const Position si(1.0, 2.0), sj(-3.0, 0.5);
  // measurement received at s_j, so the constraint is s_j - s_i
  const PathMeasurement m = los_path_measurement(sj, si);
  EXPECT_NEAR(m.range, (si - sj).norm(), 1e-12);
  EXPECT_LT((los_rows(m).rhs - (sj - si)).norm(), 1e-12);
}

TEST(PseudoInverse, OrthonormalRows) {
  const auto g = rows({{1, 0}, {0, 1}});
  const Eigen::Matrix2Xd p = pseudo_inverse(g);
  EXPECT_LT(max_abs_diff(p, Eigen::Matrix2d::Identity()), 1e-15);
  EXPECT_LT((p * Eigen::Vector2d(2, 3) - Vec2(2, 3)).norm(), 1e-15);
}

TEST(PseudoInverse, SingleRowIsMinimumNorm) {
  const auto g = rows({{1, 0}});
  const Eigen::Matrix2Xd p = pseudo_inverse(g);
  EXPECT_LT(max_abs_diff(p, Eigen::Vector2d(1, 0)), 1e-15);
  const Mat2 basis = p * p.transpose();
  EXPECT_LT(max_abs_diff(basis, Eigen::Vector2d(1, 0).asDiagonal().toDenseMatrix()), 1e-15);
}

TEST(PseudoInverse, ParallelRowsAndZeroMatrix) {
  const auto g = rows({{1, 2}, {2, 4}, {-1, -2}});
  EXPECT_EQ(numerical_rank(g), 1);
  EXPECT_LT(max_abs_diff(pseudo_inverse(g), reference_pinv(g)), 1e-12);
  EXPECT_GBPL_ERROR(pseudo_inverse(rows({{0, 0}, {0, 0}})), ErrorCode::RankDeficient);
}

TEST(PseudoInverse, FourIdentitiesOnRandomMatrices) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 1000; ++trial) {
    const int r = 1 + trial % 3;
    Eigen::MatrixX2d g(r, 2);
    for (int i = 0; i < r; ++i) g.row(i) << z(gen), z(gen);
    if (trial % 10 == 9 && r > 1) g.row(1) = 1.7 * g.row(0);  // force rank 1
    const Eigen::MatrixXd p = pseudo_inverse(g);
    const double gs = g.cwiseAbs().maxCoeff(), ps = p.cwiseAbs().maxCoeff();
    ASSERT_LT(max_abs_diff(g * p * g, g), 1e-9 * gs);
    ASSERT_LT(max_abs_diff(p * g * p, p), 1e-9 * ps);
    const Eigen::MatrixXd gp = g * p, pg = p * g;
    ASSERT_LT(max_abs_diff(gp, gp.transpose()), 1e-9);
    ASSERT_LT(max_abs_diff(pg, pg.transpose()), 1e-9);
    ASSERT_LT(max_abs_diff(p, reference_pinv(g)), 1e-9 * ps);
  }
}

TEST(EdgeConstraint, OrthonormalRowsGiveIdentityBasis) {
  // g = (1,0), (0,1) is not reachable from bounce angles (|g_x| = 1/cos),
  // so check offset and basis from the pseudo-inverse directly
  const auto g = rows({{1, 0}, {0, 1}});
  const Eigen::Matrix2Xd p = pseudo_inverse(g);
  EXPECT_LT((p * Eigen::Vector2d(2, 3) - Vec2(2, 3)).norm(), 1e-15);
  EXPECT_LT(max_abs_diff(p * p.transpose(), Mat2::Identity()), 1e-15);
}

TEST(EdgeConstraint, NoiselessTwoPathEdgeRecoversDifference) {
  const Position si(-4.5, -1.5), sj(0.0, 0.0);
  const std::vector<PathMeasurement> paths = {
      mirror_path_measurement(si, sj, {0.0, 2.0}),
      mirror_path_measurement(si, sj, {pi / 2, 6.0}),
  };
  const EdgeConstraint e = build_edge_constraint(paths);
  EXPECT_EQ(e.rank, 2);
  EXPECT_EQ(e.path_count, 2u);
  EXPECT_LT((e.offset - (si - sj)).norm(), 1e-9);
  EXPECT_LT(max_abs_diff(e.basis, e.basis.transpose()), 1e-15);
}

TEST(EdgeConstraint, RandomConstraintsSatisfyPseudoInverseAndBasisProperties) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> angle(0.0, 2 * pi), range(1.0, 20.0);
  int built = 0;
  while (built < 1000) {
    const int r = 1 + built % 3;
    std::vector<PathMeasurement> paths;
    for (int k = 0; k < r; ++k) paths.push_back({range(gen), angle(gen), angle(gen)});
    EdgeConstraint e;
    try {
      e = build_edge_constraint(paths);
    } catch (const Error&) {
      continue;  // all degenerate: vanishingly rare
    }
    const Eigen::MatrixXd g = e.geometry, p = e.pseudo_inverse;
    const double scale = 1.0 + g.cwiseAbs().maxCoeff() * p.cwiseAbs().maxCoeff();
    ASSERT_LT(max_abs_diff(g * p * g, g), 1e-9 * scale * g.cwiseAbs().maxCoeff());
    ASSERT_LT(max_abs_diff(p * g * p, p), 1e-9 * scale * p.cwiseAbs().maxCoeff());
    const Eigen::SelfAdjointEigenSolver<Mat2> eig(e.basis);
    ASSERT_GE(eig.eigenvalues().minCoeff(), -1e-12 * (1.0 + eig.eigenvalues().maxCoeff()));
    ASSERT_EQ(e.basis, e.basis.transpose());
    ASSERT_NEAR(e.basis_max_eigenvalue(), eig.eigenvalues().maxCoeff(),
                1e-9 * (1.0 + eig.eigenvalues().maxCoeff()));
    ASSERT_TRUE(e.offset.allFinite());
    ++built;
  }
}

TEST(EdgeConstraint, DropsDegenerateAndKeepsLos) {
  const std::vector<PathMeasurement> paths = {
      {3.0, 0.3, 0.3},      // parallel rays
      {5.0, pi, 0.0},       // LOS along +x
  };
  const EdgeConstraint e = build_edge_constraint(paths);
  ASSERT_EQ(e.dropped_paths, std::vector<std::size_t>{0});
  EXPECT_EQ(e.geometry.rows(), 2);
  EXPECT_EQ(e.rank, 2);
  EXPECT_LT((e.offset - Vec2(5.0, 0.0)).norm(), 1e-12);
}

TEST(EdgeConstraint, AllDegenerateFails) {
  const std::vector<PathMeasurement> paths = {{3.0, 0.3, 0.3}, {2.0, 1.0, 1.0}};
  EXPECT_GBPL_ERROR(build_edge_constraint(paths), ErrorCode::AllPathsDegenerate);
}
