#include "gbpl/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <string>

#include "gbpl/error.hpp"

namespace gbpl {
namespace {

double bearing(const Vec2& v) { return normalize_angle(std::atan2(v.y(), v.x())); }

std::string edge_name(NodeId a, NodeId b) {
  return std::to_string(a) + "-" + std::to_string(b);
}

// Angle between the two rays leaving the reflection point, in [0, pi].
double ray_angle(const PathMeasurement& m) {
  return std::abs(wrap_difference(m.aoa_at_receiver - m.aoa_at_sender));
}

std::vector<Reflector> sample_link_reflectors(const Position& a, const Position& b,
                                              const ScatterFamily& family, int paths,
                                              const ReflectorSampling& sampling, Rng& rng) {
  if (family.orientations.empty()) {
    throw Error(ErrorCode::InvalidScenario, "scatter family has no orientations");
  }
  std::vector<Reflector> out;
  for (int k = 0; k < paths; ++k) {
    const double orientation =
        family.orientations[static_cast<std::size_t>(k) % family.orientations.size()];
    out.push_back(sample_reflector(b, a, orientation, sampling, rng));
  }
  return out;
}

void add_link_measurements(NetworkScenario& scenario, const Link& link) {
  const Position& si = scenario.true_positions.at(link.i);
  const Position& sj = scenario.true_positions.at(link.j);
  // i -> j: received at j, sent by i
  std::vector<PathMeasurement> forward;
  for (const Reflector& r : link.reflectors) {
    try {
      forward.push_back(mirror_path_measurement(sj, si, r));
    } catch (const Error& e) {
      throw Error(e.code(), "link " + edge_name(link.i, link.j) + ": " + e.detail());
    }
  }
  if (link.los) forward.push_back(los_path_measurement(sj, si));

  std::vector<PathMeasurement> backward;
  backward.reserve(forward.size());
  for (const auto& m : forward) backward.push_back(m.reversed());

  scenario.edges[{link.i, link.j}] = std::move(forward);
  scenario.edges[{link.j, link.i}] = std::move(backward);
}

bool is_connected(std::size_t n, NodeId root,
                  const std::vector<std::pair<NodeId, NodeId>>& links) {
  std::vector<std::vector<NodeId>> adj(n);
  for (auto [a, b] : links) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<bool> seen(n, false);
  std::queue<NodeId> q;
  q.push(root);
  seen[root] = true;
  std::size_t count = 1;
  while (!q.empty()) {
    NodeId v = q.front();
    q.pop();
    for (NodeId w : adj[v]) {
      if (!seen[w]) {
        seen[w] = true;
        ++count;
        q.push(w);
      }
    }
  }
  return count == n;
}

}  // namespace

Vec2 Reflector::direction() const { return {std::cos(orientation), std::sin(orientation)}; }

Vec2 Reflector::normal() const { return {-std::sin(orientation), std::cos(orientation)}; }

double Reflector::signed_distance(const Position& p) const { return normal().dot(p) - offset; }

ScatterFamily ScatterFamily::orthogonal() { return {"orthogonal", {0.0, deg_to_rad(90)}}; }

ScatterFamily ScatterFamily::biorthogonal() {
  return {"biorthogonal", {0.0, deg_to_rad(45)}};
}

ScatterFamily ScatterFamily::tilted(double degrees) {
  std::ostringstream name;
  name << "tilted:" << degrees;
  return {name.str(), {0.0, deg_to_rad(degrees)}};
}

ScatterFamily ScatterFamily::angles(std::vector<double> degrees) {
  ScatterFamily f;
  std::ostringstream name;
  name << "angles:";
  for (std::size_t k = 0; k < degrees.size(); ++k) {
    if (k) name << ',';
    name << degrees[k];
    f.orientations.push_back(deg_to_rad(degrees[k]));
  }
  f.name = name.str();
  return f;
}

ScatterFamily ScatterFamily::parse(const std::string& text) {
  if (text == "orthogonal") return orthogonal();
  if (text == "biorthogonal") return biorthogonal();
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  if (colon != std::string::npos && (head == "tilted" || head == "angles")) {
    std::vector<double> values;
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        values.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidScenario, "bad angle '" + item + "' in '" + text + "'");
      }
    }
    if (head == "tilted" && values.size() == 1) return tilted(values[0]);
    if (head == "angles" && !values.empty()) return angles(std::move(values));
  }
  throw Error(ErrorCode::InvalidScenario, "unknown scatter family '" + text + "'");
}

std::vector<Position> paper_preset_positions() {
  return {Position(0.0, 0.0), Position(-4.5, -1.5), Position(4.0, -1.0), Position(-1.0, -8.0),
          Position(4.2, -6.0)};
}

std::vector<std::pair<NodeId, NodeId>> paper_preset_topology() {
  return {{0, 1}, {0, 2}, {1, 3}, {2, 4}, {3, 4}};
}

PathMeasurement mirror_path_measurement(const Position& s_i, const Position& s_j,
                                        const Reflector& reflector) {
  const double h_i = reflector.signed_distance(s_i);
  const double h_j = reflector.signed_distance(s_j);
  constexpr double kMinClearance = 1e-9;
  if (!(h_i * h_j > 0.0) || std::abs(h_i) < kMinClearance || std::abs(h_j) < kMinClearance) {
    throw Error(ErrorCode::InvalidReflection, "nodes are not strictly on one side of the reflector");
  }
  const Vec2 n = reflector.normal();
  const Position image = s_j - 2.0 * h_j * n;
  // point on the segment image -> s_i where the signed distance crosses zero
  const double t = h_j / (h_i + h_j);
  const Position hit = image + t * (s_i - image);
  if (!(t > 0.0 && t < 1.0) || (hit - s_i).norm() < kMinClearance ||
      (hit - s_j).norm() < kMinClearance) {
    throw Error(ErrorCode::InvalidReflection, "reflection point outside the image segment");
  }
  PathMeasurement m;
  m.range = (s_i - image).norm();
  m.aoa_at_receiver = bearing(hit - s_i);
  m.aoa_at_sender = bearing(hit - s_j);
  return m;
}

PathMeasurement los_path_measurement(const Position& s_i, const Position& s_j) {
  const Vec2 diff = s_j - s_i;
  const double d = diff.norm();
  if (!(d > 0.0)) throw Error(ErrorCode::CoincidentNodes, "LOS path between coincident nodes");
  return {d, bearing(diff), bearing(-diff)};
}

PathMeasurement apply_noise(const PathMeasurement& m, const NoiseModel& noise, Rng& rng) {
  const double range_err = std::sqrt(noise.sigma2_range) * rng.standard_normal();
  const double rx_err = noise.aoa_halfwidth * rng.uniform(-1.0, 1.0);
  const double tx_err = noise.aoa_halfwidth * rng.uniform(-1.0, 1.0);
  return {m.range + range_err, normalize_angle(m.aoa_at_receiver + rx_err),
          normalize_angle(m.aoa_at_sender + tx_err)};
}

Reflector sample_reflector(const Position& s_i, const Position& s_j, double orientation,
                           const ReflectorSampling& sampling, Rng& rng) {
  Reflector r{normalize_angle(orientation), 0.0};
  if (r.orientation >= std::numbers::pi) r.orientation -= std::numbers::pi;
  const Vec2 n = r.normal();
  const double p_i = n.dot(s_i), p_j = n.dot(s_j);
  for (int attempt = 0; attempt < sampling.max_attempts; ++attempt) {
    const double gap = rng.uniform(sampling.min_gap, sampling.max_gap);
    r.offset = rng.coin() ? std::max(p_i, p_j) + gap : std::min(p_i, p_j) - gap;
    try {
      const PathMeasurement m = mirror_path_measurement(s_i, s_j, r);
      if (classify_path(m) == PathClass::SingleBounce && ray_angle(m) >= sampling.min_ray_angle) {
        return r;
      }
    } catch (const Error&) {
      // rejected draw
    }
  }
  throw Error(ErrorCode::ScenarioInfeasible,
              "no valid reflector at " + std::to_string(rad_to_deg(orientation)) + " deg after " +
                  std::to_string(sampling.max_attempts) + " attempts");
}

void regenerate_measurements(NetworkScenario& scenario) {
  scenario.edges.clear();
  for (const Link& link : scenario.links) add_link_measurements(scenario, link);
}

NetworkScenario build_scenario(const ScenarioSpec& spec, Rng& rng) {
  NetworkScenario scenario;
  scenario.noise = spec.noise;
  scenario.seed = rng.seed();

  auto sample_links = [&](const std::vector<std::pair<NodeId, NodeId>>& topology,
                          const ScatterFamily& family, int paths) {
    for (auto [i, j] : topology) {
      const Position& a = scenario.true_positions.at(i);
      const Position& b = scenario.true_positions.at(j);
      try {
        scenario.links.push_back(
            {i, j, sample_link_reflectors(a, b, family, paths, spec.sampling, rng), false});
      } catch (const Error& e) {
        throw Error(e.code(), "link " + edge_name(i, j) + ": " + e.detail());
      }
    }
  };

  if (const auto* preset = std::get_if<PaperPresetSpec>(&spec.layout)) {
    scenario.true_positions = paper_preset_positions();
    scenario.anchor = 0;
    sample_links(paper_preset_topology(), preset->scatter, preset->paths_per_edge);
  } else if (const auto* random = std::get_if<RandomSpec>(&spec.layout)) {
    if (random->node_count < 2) {
      throw Error(ErrorCode::InvalidScenario, "random layout needs at least 2 nodes");
    }
    constexpr int kLayoutAttempts = 1000;
    constexpr double kMinSeparation = 0.5;
    std::vector<std::pair<NodeId, NodeId>> topology;
    bool placed = false;
    for (int attempt = 0; attempt < kLayoutAttempts && !placed; ++attempt) {
      std::vector<Position> pos{Position::Zero()};
      while (pos.size() < random->node_count) {
        const Position p(rng.uniform(-random->arena / 2, random->arena / 2),
                         rng.uniform(-random->arena / 2, random->arena / 2));
        const bool clear = std::all_of(pos.begin(), pos.end(), [&](const Position& q) {
          return (p - q).norm() >= kMinSeparation;
        });
        if (clear) pos.push_back(p);
      }
      topology.clear();
      for (NodeId a = 0; a < pos.size(); ++a) {
        for (NodeId b = a + 1; b < pos.size(); ++b) {
          if ((pos[a] - pos[b]).norm() <= random->radius) topology.emplace_back(a, b);
        }
      }
      if (!is_connected(pos.size(), 0, topology)) continue;
      scenario.true_positions = std::move(pos);
      scenario.links.clear();
      try {
        sample_links(topology, random->scatter, random->paths_per_edge);
        placed = true;
      } catch (const Error& e) {
        // some pair admits no usable wall of this orientation: redraw the layout
        if (e.code() != ErrorCode::ScenarioInfeasible) throw;
      }
    }
    if (!placed) {
      throw Error(ErrorCode::ScenarioInfeasible, "could not draw a connected random layout");
    }
    scenario.anchor = 0;
  } else {
    const auto& expl = std::get<ExplicitSpec>(spec.layout);
    if (expl.positions.empty() || expl.anchor >= expl.positions.size()) {
      throw Error(ErrorCode::InvalidScenario, "explicit layout needs positions and a valid anchor");
    }
    scenario.true_positions = expl.positions;
    scenario.anchor = expl.anchor;
    for (const ExplicitLink& l : expl.links) {
      if (l.i >= expl.positions.size() || l.j >= expl.positions.size() || l.i == l.j) {
        throw Error(ErrorCode::InvalidScenario, "link " + edge_name(l.i, l.j) + " is invalid");
      }
      if (l.reflectors) {
        scenario.links.push_back({l.i, l.j, *l.reflectors, l.los});
      } else {
        sample_links({{l.i, l.j}}, expl.scatter, expl.paths_per_edge);
        scenario.links.back().los = l.los;
      }
    }
  }

  regenerate_measurements(scenario);
  return scenario;
}

EdgeMeasurements noisy_measurements(const NetworkScenario& scenario, Rng& rng) {
  EdgeMeasurements out;
  for (const Link& link : scenario.links) {
    const auto& clean = scenario.edges.at({link.i, link.j});
    std::vector<PathMeasurement> forward, backward;
    for (const PathMeasurement& m : clean) {
      const PathMeasurement noisy = apply_noise(m, scenario.noise, rng);
      forward.push_back(noisy);
      backward.push_back(noisy.reversed());
    }
    out[{link.i, link.j}] = std::move(forward);
    out[{link.j, link.i}] = std::move(backward);
  }
  return out;
}

LocalizationProblem build_problem(const NetworkScenario& scenario,
                                  const EdgeMeasurements& measurements,
                                  const GeometryTolerances& tol) {
  LocalizationProblem problem;
  problem.node_count = scenario.node_count();
  problem.anchor = scenario.anchor;
  problem.anchor_position = scenario.true_positions.at(scenario.anchor);
  for (const auto& [edge, paths] : measurements) {
    try {
      problem.edges.emplace(edge, build_edge_constraint(paths, tol));
    } catch (const Error& e) {
      throw Error(e.code(), "edge " + std::to_string(edge.from) + "->" + std::to_string(edge.to) +
                                ": " + e.detail());
    }
  }
  return problem;
}

std::vector<Position> pairwise_baseline(const LocalizationProblem& problem) {
  const auto adj = problem.neighbors();
  constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> level(problem.node_count, kUnreached);
  std::vector<NodeId> order;
  std::queue<NodeId> frontier;
  level.at(problem.anchor) = 0;
  frontier.push(problem.anchor);
  while (!frontier.empty()) {
    const NodeId n = frontier.front();
    frontier.pop();
    order.push_back(n);
    for (NodeId m : adj[n]) {
      if (level[m] == kUnreached) {
        level[m] = level[n] + 1;
        frontier.push(m);
      }
    }
  }

  std::vector<Position> estimate(problem.node_count, Position::Zero());
  estimate[problem.anchor] = problem.anchor_position;
  for (NodeId n = 0; n < problem.node_count; ++n) {
    if (level[n] == kUnreached) {
      throw Error(ErrorCode::UnreachableNode,
                  "node " + std::to_string(n) + " is not connected to the anchor");
    }
  }
  for (NodeId n : order) {
    if (n == problem.anchor) continue;
    // adjacency lists are sorted, so the first hit is the lowest index
    const auto parent = std::find_if(adj[n].begin(), adj[n].end(),
                                     [&](NodeId p) { return level[p] + 1 == level[n]; });
    estimate[n] = estimate[*parent] + problem.edges.at({*parent, n}).offset;
  }
  return estimate;
}

}  // namespace gbpl
