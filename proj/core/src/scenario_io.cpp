#include "gbpl/scenario_io.hpp"

#include <fstream>
#include <sstream>

#include "gbpl/error.hpp"
#include <nlohmann/json.hpp>

namespace gbpl {
namespace {

using nlohmann::json;

std::vector<Reflector> parse_reflectors(const json& arr) {
  std::vector<Reflector> out;
  for (const json& r : arr) {
    out.push_back({deg_to_rad(r.at("orientation_deg").get<double>()),
                   r.at("offset_m").get<double>()});
  }
  return out;
}

ScenarioSpec parse_scenario(const json& doc) {
  ScenarioSpec spec;
  const ScatterFamily scatter = doc.contains("scatter")
                                    ? ScatterFamily::parse(doc["scatter"].get<std::string>())
                                    : ScatterFamily::orthogonal();
  const int paths = doc.value("paths_per_edge", 2);
  if (paths < 1) throw Error(ErrorCode::InvalidScenario, "paths_per_edge must be >= 1");

  if (doc.contains("nodes")) {
    ExplicitSpec e;
    for (const json& p : doc["nodes"]) {
      if (!p.is_array() || p.size() != 2) {
        throw Error(ErrorCode::InvalidScenario, "node positions must be [x, y] pairs");
      }
      e.positions.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    e.anchor = doc.value("anchor", std::size_t{0});
    for (const json& l : doc.value("edges", json::array())) {
      ExplicitLink link;
      link.i = l.at("i").get<NodeId>();
      link.j = l.at("j").get<NodeId>();
      link.los = l.value("los", false);
      if (l.contains("reflectors")) link.reflectors = parse_reflectors(l["reflectors"]);
      e.links.push_back(std::move(link));
    }
    e.scatter = scatter;
    e.paths_per_edge = paths;
    spec.layout = std::move(e);
  } else if (doc.contains("random")) {
    const json& r = doc["random"];
    RandomSpec rs;
    rs.node_count = r.value("node_count", rs.node_count);
    rs.arena = r.value("arena", rs.arena);
    rs.radius = r.value("radius", rs.radius);
    rs.scatter = scatter;
    rs.paths_per_edge = paths;
    spec.layout = rs;
  } else {
    const std::string preset = doc.value("preset", std::string("paper"));
    if (preset != "paper") {
      throw Error(ErrorCode::InvalidScenario, "unknown preset '" + preset + "'");
    }
    spec.layout = PaperPresetSpec{scatter, paths};
  }

  if (doc.contains("noise")) {
    const json& n = doc["noise"];
    spec.noise.sigma2_range = n.value("sigma2_range", spec.noise.sigma2_range);
    if (n.contains("aoa_halfwidth_deg")) {
      spec.noise.aoa_halfwidth = deg_to_rad(n["aoa_halfwidth_deg"].get<double>());
    }
  }
  if (spec.noise.sigma2_range < 0.0 || spec.noise.aoa_halfwidth < 0.0) {
    throw Error(ErrorCode::InvalidScenario, "noise parameters must be non-negative");
  }
  if (doc.contains("sampling")) {
    const json& s = doc["sampling"];
    spec.sampling.min_gap = s.value("min_gap_m", spec.sampling.min_gap);
    spec.sampling.max_gap = s.value("max_gap_m", spec.sampling.max_gap);
    if (s.contains("min_ray_angle_deg")) {
      spec.sampling.min_ray_angle = deg_to_rad(s["min_ray_angle_deg"].get<double>());
    }
  }
  return spec;
}

}  // namespace

double default_bp_sigma2(const NoiseModel& noise) {
  return noise.sigma2_range > 0.0 ? noise.sigma2_range : 3.0;
}

ExperimentConfig parse_config(const std::string& json_text) {
  try {
    const json doc = json::parse(json_text);
    ExperimentConfig cfg;
    cfg.scenario = parse_scenario(doc);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.bp.sigma2 = default_bp_sigma2(cfg.scenario.noise);
    if (doc.contains("bp")) {
      const json& b = doc["bp"];
      if (b.contains("alpha") && !b["alpha"].is_null()) cfg.bp.alpha = b["alpha"].get<double>();
      cfg.bp.tol = b.value("tol", cfg.bp.tol);
      cfg.bp.max_iters = b.value("max_iters", cfg.bp.max_iters);
      cfg.bp.sigma2 = b.value("sigma2", cfg.bp.sigma2);
      if (b.contains("eps_los_deg")) {
        cfg.bp.geometry.eps_los = deg_to_rad(b["eps_los_deg"].get<double>());
      }
    }
    if (cfg.bp.max_iters < 1 || !(cfg.bp.tol > 0.0) || !(cfg.bp.sigma2 > 0.0) ||
        cfg.bp.alpha < 0.0) {
      throw Error(ErrorCode::InvalidConfig, "bp needs max_iters >= 1, tol > 0, sigma2 > 0");
    }
    return cfg;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("malformed config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

ExperimentConfig paper_preset_config(const ScatterFamily& scatter) {
  ExperimentConfig cfg;
  cfg.scenario.layout = PaperPresetSpec{scatter, 2};
  cfg.bp.sigma2 = default_bp_sigma2(cfg.scenario.noise);
  return cfg;
}

std::string resolved_config_json(const NetworkScenario& scenario, const BpConfig& bp,
                                 std::uint64_t seed) {
  json doc;
  doc["nodes"] = json::array();
  for (const Position& p : scenario.true_positions) doc["nodes"].push_back({p.x(), p.y()});
  doc["anchor"] = scenario.anchor;
  doc["edges"] = json::array();
  for (const Link& l : scenario.links) {
    json refl = json::array();
    for (const Reflector& r : l.reflectors) {
      refl.push_back({{"orientation_deg", rad_to_deg(r.orientation)}, {"offset_m", r.offset}});
    }
    doc["edges"].push_back({{"i", l.i}, {"j", l.j}, {"reflectors", refl}, {"los", l.los}});
  }
  doc["noise"] = {{"sigma2_range", scenario.noise.sigma2_range},
                  {"aoa_halfwidth_deg", rad_to_deg(scenario.noise.aoa_halfwidth)}};
  doc["bp"] = {{"alpha", bp.alpha},
               {"sigma2", bp.sigma2},
               {"tol", bp.tol},
               {"max_iters", bp.max_iters},
               {"eps_los_deg", rad_to_deg(bp.geometry.eps_los)}};
  doc["seed"] = seed;
  return doc.dump(2) + "\n";
}

}  // namespace gbpl
