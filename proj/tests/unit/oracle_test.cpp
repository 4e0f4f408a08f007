#include <vector>

#include <gtest/gtest.h>

#include "gbpl/bp.hpp"
#include "gbpl/oracle.hpp"
#include "gbpl/scenario.hpp"
#include "support/oracles.hpp"

using namespace gbpl;

namespace {

NetworkScenario explicit_scenario(std::vector<Position> positions,
                                  std::vector<std::pair<NodeId, NodeId>> links, int paths,
                                  NoiseModel noise, std::uint64_t seed) {
  ExplicitSpec layout;
  layout.positions = std::move(positions);
  layout.paths_per_edge = paths;
  for (auto [i, j] : links) layout.links.push_back({i, j, std::nullopt, false});
  Rng rng(seed);
  return build_scenario({layout, noise, {}}, rng);
}

}  // namespace

TEST(JointLs, NoiselessPresetIsExact) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ScenarioSpec spec;
    spec.noise = {0.0, 0.0};
    Rng rng(seed);
    const NetworkScenario sc = build_scenario(spec, rng);
    const JointSolution sol = joint_ls_solve(build_problem(sc, sc.edges));
    for (NodeId n = 0; n < sc.node_count(); ++n) {
      EXPECT_LT((sol.positions[n] - sc.true_positions[n]).norm(), 1e-9);
    }
    EXPECT_LE(sol.residual_norm, 1e-9);
    EXPECT_GE(sol.normal_matrix_condition, 1.0);
  }
}

TEST(JointLs, NoisyResidualIsPositive) {
  ScenarioSpec spec;
  Rng rng(1);
  const NetworkScenario sc = build_scenario(spec, rng);
  Rng noise = rng.split(1);
  const JointSolution sol = joint_ls_solve(build_problem(sc, noisy_measurements(sc, noise)));
  EXPECT_GT(sol.residual_norm, 1e-3);
}

TEST(JointLs, SinglePathEdgeIsRankDeficient) {
  const NetworkScenario sc = explicit_scenario({{0, 0}, {3, -2}}, {{0, 1}}, 1, {0.0, 0.0}, 1);
  try {
    joint_ls_solve(build_problem(sc, sc.edges));
    ADD_FAILURE() << "expected RankDeficientSystem";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RankDeficientSystem);
    EXPECT_NE(e.detail().find("null-space dimension 1"), std::string::npos) << e.what();
  }
}

TEST(JointLs, AnchorAwayFromOrigin) {
  ExplicitSpec layout;
  layout.positions = {{2, 1}, {-1, 4}, {5, 5}};
  layout.anchor = 1;
  layout.links = {{0, 1, std::nullopt, false}, {1, 2, std::nullopt, false}};
  Rng rng(2);
  const NetworkScenario sc = build_scenario({layout, {0.0, 0.0}, {}}, rng);
  const JointSolution sol = joint_ls_solve(build_problem(sc, sc.edges));
  for (NodeId n = 0; n < 3; ++n) {
    EXPECT_LT((sol.positions[n] - sc.true_positions[n]).norm(), 1e-9);
  }
}

TEST(JointLs, StackedRowsMatchHandAssembly) {
  const NetworkScenario sc =
      explicit_scenario({{0, 0}, {3, -2}, {6, 1}}, {{0, 1}, {1, 2}}, 2, {0.0, 0.0}, 4);
  const LocalizationProblem p = build_problem(sc, sc.edges);
  const StackedSystem sys = stack_rows(p);
  EXPECT_EQ(sys.unknowns, (std::vector<NodeId>{1, 2}));
  EXPECT_EQ(sys.design.rows(), 8);
  EXPECT_EQ(sys.design.cols(), 4);
  Eigen::VectorXd truth(4);
  truth << 3, -2, 6, 1;
  EXPECT_LT((sys.design * truth - sys.rhs).norm(), 1e-9);
}

TEST(GridMap, OneUnknownAgreesWithLeastSquares) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const NetworkScenario sc = explicit_scenario({{0, 0}, {-4.5, -1.5}}, {{0, 1}}, 2, {}, seed);
    Rng rng(seed + 100);
    const LocalizationProblem p = build_problem(sc, noisy_measurements(sc, rng));
    const double step = 0.05;
    const auto grid = grid_map(p, step, {});
    const auto ls = joint_ls_solve(p).positions;
    EXPECT_LE((grid[1] - ls[1]).cwiseAbs().maxCoeff(), step) << "seed " << seed;
  }
}

TEST(GridMap, NoiselessLandsOnNearestGridPoint) {
  const NetworkScenario sc = explicit_scenario({{0, 0}, {-4.5, -1.5}}, {{0, 1}}, 2, {0, 0}, 1);
  const auto grid = grid_map(build_problem(sc, sc.edges), 0.5, {});
  EXPECT_LT((grid[1] - Position(-4.5, -1.5)).norm(), 1e-12);
  const auto off = grid_map(build_problem(sc, sc.edges), 0.4, {});
  // nearest points of the 0.4 grid from -10: x -4.4 or -4.6, y -1.6 or -1.2
  EXPECT_LE((off[1] - Position(-4.5, -1.5)).cwiseAbs().maxCoeff(), 0.2 + 1e-9);
}

TEST(GridMap, TwoUnknownsAgreeWithLeastSquares) {
  const NetworkScenario sc =
      explicit_scenario({{0, 0}, {3, -2}, {1, -5}}, {{0, 1}, {1, 2}, {0, 2}}, 2, {}, 9);
  Rng rng(10);
  const LocalizationProblem p = build_problem(sc, noisy_measurements(sc, rng));
  const double step = 0.25;
  const auto grid = grid_map(p, step, {-8, 8, -8, 8});
  const auto ls = joint_ls_solve(p).positions;
  for (NodeId n : {1, 2}) {
    EXPECT_LE((grid[n] - ls[n]).cwiseAbs().maxCoeff(), step) << "node " << n;
  }
}

TEST(GridMap, Errors) {
  ScenarioSpec spec;
  Rng rng(1);
  const NetworkScenario sc = build_scenario(spec, rng);
  EXPECT_GBPL_ERROR(grid_map(build_problem(sc, sc.edges), 0.5, {}), ErrorCode::TooManyUnknowns);
  const NetworkScenario two = explicit_scenario({{0, 0}, {1, 1}}, {{0, 1}}, 2, {}, 1);
  EXPECT_GBPL_ERROR(grid_map(build_problem(two, two.edges), 0.0, {}), ErrorCode::InvalidConfig);
}
