#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gbpl/geometry.hpp"
#include "gbpl/network.hpp"
#include "gbpl/rng.hpp"

namespace gbpl {

/// Straight reflecting line {p : n^T p = offset} with direction
/// (cos orientation, sin orientation) and normal n = (-sin, cos).
struct Reflector {
  double orientation = 0.0;  ///< radians in [0, pi)
  double offset = 0.0;       ///< meters

  Vec2 direction() const;
  Vec2 normal() const;
  /// Signed distance of `p` from the line along the normal.
  double signed_distance(const Position& p) const;
};

struct NoiseModel {
  double sigma2_range = 3.0;             ///< m^2, variance of the range error
  double aoa_halfwidth = deg_to_rad(5);  ///< radians, uniform AOA error half-width
};

/// Undirected link. Measurement k of the i->j direction is taken over
/// reflectors[k]; an optional LOS path is appended after them.
struct Link {
  NodeId i = 0;
  NodeId j = 0;
  std::vector<Reflector> reflectors;
  bool los = false;
};

using EdgeMeasurements = std::map<DirectedEdge, std::vector<PathMeasurement>>;

struct NetworkScenario {
  std::vector<Position> true_positions;
  NodeId anchor = 0;
  std::vector<Link> links;
  EdgeMeasurements edges;  ///< noiseless, both directions of every link
  NoiseModel noise;
  std::uint64_t seed = 0;

  std::size_t node_count() const { return true_positions.size(); }
};

/// Orientations assigned round-robin to the paths of each link.
struct ScatterFamily {
  std::string name;
  std::vector<double> orientations;  ///< radians

  static ScatterFamily orthogonal();    ///< {0, 90 deg}
  static ScatterFamily biorthogonal();  ///< {0, 45 deg}
  static ScatterFamily tilted(double degrees);  ///< {0, degrees}
  static ScatterFamily angles(std::vector<double> degrees);
  /// Parses "orthogonal", "biorthogonal", "tilted:<deg>" or "angles:<d1>,<d2>,...".
  static ScatterFamily parse(const std::string& text);
};

/// How reflector offsets are drawn: the line is placed on a random side of
/// the node pair, `gap` meters beyond the farther node, gap ~ U[min_gap, max_gap].
/// Draws whose rays meet at less than `min_ray_angle` are rejected.
struct ReflectorSampling {
  double min_gap = 1.0;
  double max_gap = 5.0;
  double min_ray_angle = deg_to_rad(1.0);
  int max_attempts = 200;
};

struct PaperPresetSpec {
  ScatterFamily scatter = ScatterFamily::orthogonal();
  int paths_per_edge = 2;
};

struct RandomSpec {
  std::size_t node_count = 5;
  double arena = 10.0;  ///< side of the square arena centered on the anchor
  double radius = 7.0;  ///< connectivity radius
  ScatterFamily scatter = ScatterFamily::orthogonal();
  int paths_per_edge = 2;
};

struct ExplicitLink {
  NodeId i = 0;
  NodeId j = 0;
  std::optional<std::vector<Reflector>> reflectors;  ///< sampled when absent
  bool los = false;
};

struct ExplicitSpec {
  std::vector<Position> positions;
  NodeId anchor = 0;
  std::vector<ExplicitLink> links;
  ScatterFamily scatter = ScatterFamily::orthogonal();
  int paths_per_edge = 2;
};

struct ScenarioSpec {
  std::variant<PaperPresetSpec, RandomSpec, ExplicitSpec> layout = PaperPresetSpec{};
  NoiseModel noise{};
  ReflectorSampling sampling{};
};

/// Node positions used in the five-node evaluation network.
std::vector<Position> paper_preset_positions();
/// Its link topology: 0-1, 0-2, 1-3, 2-4, 3-4.
std::vector<std::pair<NodeId, NodeId>> paper_preset_topology();

/// Single-bounce path received at s_i from s_j via the reflector. Throws
/// InvalidReflection unless both nodes lie strictly on the same side.
PathMeasurement mirror_path_measurement(const Position& s_i, const Position& s_j,
                                        const Reflector& reflector);

/// Direct path received at s_i from s_j. Throws CoincidentNodes when s_i == s_j.
PathMeasurement los_path_measurement(const Position& s_i, const Position& s_j);

PathMeasurement apply_noise(const PathMeasurement& m, const NoiseModel& noise, Rng& rng);

/// Draws a reflector of the given orientation valid for the node pair.
/// Throws ScenarioInfeasible after `sampling.max_attempts` rejected draws.
Reflector sample_reflector(const Position& s_i, const Position& s_j, double orientation,
                           const ReflectorSampling& sampling, Rng& rng);

NetworkScenario build_scenario(const ScenarioSpec& spec, Rng& rng);

/// Rebuilds the noiseless measurements of `scenario.links`.
void regenerate_measurements(NetworkScenario& scenario);

/// One noisy realization of every link. Each path is perturbed once and
/// both directions see the same noisy tuple, since the endpoints exchange
/// their measurements.
EdgeMeasurements noisy_measurements(const NetworkScenario& scenario, Rng& rng);

/// Per-directed-edge constraints from a measurement set.
LocalizationProblem build_problem(const NetworkScenario& scenario,
                                  const EdgeMeasurements& measurements,
                                  const GeometryTolerances& tol = {});

/// Non-cooperative baseline: every node takes its lowest-index BFS parent's
/// estimate plus that single edge's offset.
std::vector<Position> pairwise_baseline(const LocalizationProblem& problem);

}  // namespace gbpl
