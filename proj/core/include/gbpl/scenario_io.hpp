#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "gbpl/bp.hpp"
#include "gbpl/scenario.hpp"

namespace gbpl {

/// A scenario description plus the BP settings and master seed of a run.
///
/// File format (angles in degrees, lengths in meters):
///   {
///     "nodes": [[x, y], ...], "anchor": 0,
///     "edges": [{"i": 0, "j": 1,
///                "reflectors": [{"orientation_deg": 0, "offset_m": 2.5}],
///                "los": false}],
///     "noise": {"sigma2_range": 3, "aoa_halfwidth_deg": 5},
///     "bp": {"alpha": 10000, "tol": 1e-4, "max_iters": 100},
///     "seed": 1
///   }
/// Instead of "nodes"/"edges" a file may say "preset": "paper" or give
/// "random": {"node_count", "arena", "radius"}. Edges without "reflectors"
/// are sampled from "scatter" (default "orthogonal") with "paths_per_edge"
/// paths (default 2). "bp.sigma2" defaults to noise.sigma2_range when that is
/// positive, else 3.
struct ExperimentConfig {
  ScenarioSpec scenario{};
  BpConfig bp{};
  std::uint64_t seed = 1;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Default configuration: the five-node preset with the given scatter family.
ExperimentConfig paper_preset_config(const ScatterFamily& scatter = ScatterFamily::orthogonal());

/// Fully resolved configuration (explicit nodes and reflectors) that
/// rebuilds `scenario` exactly.
std::string resolved_config_json(const NetworkScenario& scenario, const BpConfig& bp,
                                 std::uint64_t seed);

/// Applies the default sigma2 rule above when the file left it unset.
double default_bp_sigma2(const NoiseModel& noise);

}  // namespace gbpl
