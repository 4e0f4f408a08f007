#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "gbpl/scenario_io.hpp"
#include "support/oracles.hpp"

using namespace gbpl;

TEST(ParseConfig, ExplicitDocument) {
  const ExperimentConfig cfg = parse_config(R"({
    "nodes": [[0, 0], [3, -2], [6, 1]],
    "anchor": 0,
    "edges": [{"i": 0, "j": 1, "reflectors": [{"orientation_deg": 0, "offset_m": 2.5},
                                               {"orientation_deg": 90, "offset_m": 1.0}]},
              {"i": 1, "j": 2, "los": true}],
    "noise": {"sigma2_range": 2, "aoa_halfwidth_deg": 3},
    "bp": {"alpha": 20000, "tol": 1e-6, "max_iters": 50},
    "seed": 42
  })");
  const auto& layout = std::get<ExplicitSpec>(cfg.scenario.layout);
  ASSERT_EQ(layout.positions.size(), 3u);
  EXPECT_EQ(layout.positions[1], Position(3, -2));
  ASSERT_EQ(layout.links.size(), 2u);
  ASSERT_TRUE(layout.links[0].reflectors.has_value());
  EXPECT_NEAR((*layout.links[0].reflectors)[1].orientation, std::numbers::pi / 2, 1e-15);
  EXPECT_EQ((*layout.links[0].reflectors)[0].offset, 2.5);
  EXPECT_FALSE(layout.links[1].reflectors.has_value());
  EXPECT_TRUE(layout.links[1].los);
  EXPECT_EQ(cfg.scenario.noise.sigma2_range, 2.0);
  EXPECT_NEAR(cfg.scenario.noise.aoa_halfwidth, deg_to_rad(3), 1e-15);
  EXPECT_EQ(cfg.bp.alpha, 20000.0);
  EXPECT_EQ(cfg.bp.tol, 1e-6);
  EXPECT_EQ(cfg.bp.max_iters, 50);
  EXPECT_EQ(cfg.bp.sigma2, 2.0);  // follows the noise when not given
  EXPECT_EQ(cfg.seed, 42u);
}

TEST(ParseConfig, PresetAndRandom) {
  const ExperimentConfig p = parse_config(R"({"preset": "paper", "scatter": "biorthogonal"})");
  const auto& preset = std::get<PaperPresetSpec>(p.scenario.layout);
  EXPECT_EQ(preset.scatter.name, "biorthogonal");
  EXPECT_EQ(preset.paths_per_edge, 2);
  EXPECT_EQ(p.bp.sigma2, 3.0);

  const ExperimentConfig r =
      parse_config(R"({"random": {"node_count": 7, "radius": 5}, "paths_per_edge": 3,
                       "noise": {"sigma2_range": 0}, "scatter": "tilted:20"})");
  const auto& random = std::get<RandomSpec>(r.scenario.layout);
  EXPECT_EQ(random.node_count, 7u);
  EXPECT_EQ(random.radius, 5.0);
  EXPECT_EQ(random.paths_per_edge, 3);
  EXPECT_EQ(r.bp.sigma2, 3.0);  // zero noise falls back to 3
}

TEST(ParseConfig, Errors) {
  EXPECT_GBPL_ERROR(parse_config("{"), ErrorCode::InvalidConfig);
  EXPECT_GBPL_ERROR(parse_config(R"({"preset": "other"})"), ErrorCode::InvalidScenario);
  EXPECT_GBPL_ERROR(parse_config(R"({"noise": {"sigma2_range": -1}})"), ErrorCode::InvalidScenario);
  EXPECT_GBPL_ERROR(parse_config(R"({"bp": {"max_iters": 0}})"), ErrorCode::InvalidConfig);
  EXPECT_GBPL_ERROR(parse_config(R"({"nodes": [[0]]})"), ErrorCode::InvalidScenario);
  EXPECT_GBPL_ERROR(parse_config(R"({"bp": {"tol": "small"}})"), ErrorCode::InvalidConfig);
  EXPECT_GBPL_ERROR(load_config("/nonexistent/config.json"), ErrorCode::IoError);
}

TEST(ParseConfig, ResolvedJsonRoundTrips) {
  ExperimentConfig cfg = paper_preset_config(ScatterFamily::tilted(30));
  Rng rng(3);
  const NetworkScenario sc = build_scenario(cfg.scenario, rng);
  const ExperimentConfig back = parse_config(resolved_config_json(sc, cfg.bp, 3));
  EXPECT_EQ(back.seed, 3u);
  EXPECT_EQ(back.bp.sigma2, cfg.bp.sigma2);
  Rng unused(99);
  const NetworkScenario again = build_scenario(back.scenario, unused);
  ASSERT_EQ(again.links.size(), sc.links.size());
  for (std::size_t k = 0; k < sc.links.size(); ++k) {
    for (std::size_t r = 0; r < 2; ++r) {
      EXPECT_EQ(again.links[k].reflectors[r].offset, sc.links[k].reflectors[r].offset);
      EXPECT_NEAR(again.links[k].reflectors[r].orientation, sc.links[k].reflectors[r].orientation,
                  1e-15);
    }
  }
}
