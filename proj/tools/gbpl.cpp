// gbpl: command-line front end for the localization experiments.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "gbpl/agents.hpp"
#include "gbpl/error.hpp"
#include "gbpl/experiments.hpp"
#include "gbpl/oracle.hpp"
#include "gbpl/scenario_io.hpp"
#include "gbpl/udp.hpp"

using namespace gbpl;

namespace {

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> sigma2;
  std::optional<double> aoa_deg;
  std::string scatter;
  std::string transport = "direct";
  std::string mode = "both";
  int trials = 10000;
  unsigned threads = 0;
  bool oracle = false;
  std::string out;
};

void add_scenario_flags(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config, "JSON experiment config (default: five-node preset)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", a.seed, "master seed (default: the config's)");
  cmd->add_option("--sigma2", a.sigma2, "range noise variance, m^2");
  cmd->add_option("--aoa-deg", a.aoa_deg, "AOA noise half-width, degrees");
  cmd->add_option("--scatter", a.scatter,
                  "orthogonal | biorthogonal | tilted:<deg> | angles:<d1>,<d2>,...");
  cmd->add_option("--transport", a.transport, "cooperative engine")
      ->check(CLI::IsMember({"direct", "inproc", "udp"}));
}

void add_trial_flags(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--trials", a.trials, "Monte-Carlo trials")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", a.threads, "worker threads (0 = all cores)");
  cmd->add_option("--mode", a.mode, "schemes to run")
      ->check(CLI::IsMember({"coop", "pairwise", "both"}));
  cmd->add_flag("--oracle", a.oracle, "also run the joint least-squares oracle");
  cmd->add_option("--out", a.out, "run directory")->required();
}

ExperimentConfig resolve_config(const CommonArgs& a) {
  ExperimentConfig cfg = a.config.empty() ? paper_preset_config() : load_config(a.config);
  if (a.seed) cfg.seed = *a.seed;
  if (a.sigma2) {
    if (*a.sigma2 < 0) throw Error(ErrorCode::InvalidConfig, "--sigma2 must be >= 0");
    cfg.scenario.noise.sigma2_range = *a.sigma2;
    cfg.bp.sigma2 = default_bp_sigma2(cfg.scenario.noise);
  }
  if (a.aoa_deg) {
    if (*a.aoa_deg < 0) throw Error(ErrorCode::InvalidConfig, "--aoa-deg must be >= 0");
    cfg.scenario.noise.aoa_halfwidth = deg_to_rad(*a.aoa_deg);
  }
  if (!a.scatter.empty()) {
    const ScatterFamily family = ScatterFamily::parse(a.scatter);
    std::visit([&](auto& layout) { layout.scatter = family; }, cfg.scenario.layout);
  }
  return cfg;
}

Engine engine_of(const std::string& name) {
  if (name == "inproc") return Engine::InProcessAgents;
  if (name == "udp") return Engine::UdpAgents;
  return Engine::Direct;
}

MonteCarloOptions mc_options(const CommonArgs& a, const ExperimentConfig& cfg) {
  MonteCarloOptions opt;
  opt.trials = a.trials;
  opt.seed = cfg.seed;
  opt.threads = a.threads;
  opt.cooperative = a.mode != "pairwise";
  opt.pairwise = a.mode != "coop";
  opt.joint_ls = a.oracle;
  opt.engine = engine_of(a.transport);
  return opt;
}

void print_table(const MonteCarloResult& r) {
  std::vector<MeanErrorRow> rows;
  for (const auto* s : {&r.cooperative, &r.pairwise, &r.joint_ls}) {
    if (!s->has_value()) continue;
    const auto t = mean_abs_error_table(**s);
    rows.insert(rows.end(), t.begin(), t.end());
  }
  write_mean_errors_csv(std::cout, rows);
}

void report(const MonteCarloResult& r, const MonteCarloOptions& opt, const std::string& out) {
  std::fprintf(stderr, "%d trials in %.2f s -> %s\n", opt.trials, r.seconds, out.c_str());
}

// Single noise draw: true and estimated positions per node.
int cmd_run(const CommonArgs& a, int trial) {
  const ExperimentConfig cfg = resolve_config(a);
  const NetworkScenario sc = build_experiment_scenario(cfg, cfg.seed);
  const LocalizationProblem p = trial_problem(sc, cfg.bp, cfg.seed, trial);

  std::vector<Position> coop;
  int rounds = 0;
  switch (engine_of(a.transport)) {
    case Engine::Direct: {
      const BpHistory h = run_sync_rounds(p, cfg.bp);
      coop = h.estimates();
      rounds = static_cast<int>(h.iterations.size()) - 1;
      break;
    }
    case Engine::InProcessAgents:
    case Engine::UdpAgents: {
      const BeliefHistory h = a.transport == "udp"
                                  ? run_agents_udp(p, cfg.bp, cfg.bp.max_iters)
                                  : run_agents_in_process(p, cfg.bp, cfg.bp.max_iters);
      for (const auto& b : h.back()) coop.push_back(b.mean);
      rounds = cfg.bp.max_iters;
      break;
    }
  }
  const std::vector<Position> pair = pairwise_baseline(p);
  std::optional<std::vector<Position>> joint;
  if (a.oracle) joint = joint_ls_solve(p).positions;

  std::ostringstream csv;
  csv << "node,true_x,true_y,coop_x,coop_y,pairwise_x,pairwise_y";
  if (joint) csv << ",joint_ls_x,joint_ls_y";
  csv << '\n';
  for (NodeId n = 0; n < sc.node_count(); ++n) {
    auto put = [&](const Position& q) {
      csv << ',' << format_csv_number(q.x()) << ',' << format_csv_number(q.y());
    };
    csv << n;
    put(sc.true_positions[n]);
    put(coop[n]);
    put(pair[n]);
    if (joint) put((*joint)[n]);
    csv << '\n';
  }
  std::cout << csv.str();
  std::fprintf(stderr, "trial %d, %d BP rounds\n", trial, rounds);
  if (!a.out.empty()) {
    std::filesystem::create_directories(a.out);
    std::ofstream(std::filesystem::path(a.out) / "estimates.csv") << csv.str();
    std::ofstream(std::filesystem::path(a.out) / "config.json")
        << resolved_config_json(sc, cfg.bp, cfg.seed);
  }
  return 0;
}

int cmd_montecarlo(const CommonArgs& a, ArtifactSelection what, bool trace, bool table_to_stdout) {
  const ExperimentConfig cfg = resolve_config(a);
  MonteCarloOptions opt = mc_options(a, cfg);
  opt.trace = trace;
  const MonteCarloResult r = run_montecarlo(cfg, opt);
  write_run_directory(a.out, r, opt, what);
  if (table_to_stdout) print_table(r);
  report(r, opt, a.out);
  return 0;
}

int cmd_convergence(const CommonArgs& a) {
  const ExperimentConfig cfg = resolve_config(a);
  MonteCarloOptions opt = mc_options(a, cfg);
  opt.cooperative = true;
  opt.pairwise = false;
  opt.joint_ls = false;
  opt.trace = true;
  const MonteCarloResult r = run_montecarlo(cfg, opt);
  write_run_directory(a.out, r, opt, {false, false, false, true});
  write_convergence_csv(std::cout, *r.trace);
  report(r, opt, a.out);
  return 0;
}

// The evaluation of the five-node network for both scatter families.
int cmd_paper_preset(const CommonArgs& a) {
  for (const char* family : {"orthogonal", "biorthogonal"}) {
    CommonArgs b = a;
    b.scatter = family;
    const ExperimentConfig cfg = resolve_config(b);
    MonteCarloOptions opt = mc_options(b, cfg);
    opt.trace = true;
    const MonteCarloResult r = run_montecarlo(cfg, opt);
    const std::string dir = (std::filesystem::path(a.out) / family).string();
    write_run_directory(dir, r, opt);
    std::cout << "# " << family << '\n';
    print_table(r);
    report(r, opt, dir);
  }
  return 0;
}

struct AgentArgs {
  NodeId node = 0;
  std::string bind;
  std::vector<std::string> peers;
  int rounds = 0;
  int trial = 0;
  int retry_ms = 200;
  int retries = 10;
};

// One sensor of a multi-process loopback run. Every process loads the same
// config and seed and keeps only its own local view of the network.
int cmd_agent(const CommonArgs& a, const AgentArgs& g) {
  const ExperimentConfig cfg = resolve_config(a);
  const NetworkScenario sc = build_experiment_scenario(cfg, cfg.seed);
  const LocalizationProblem p = trial_problem(sc, cfg.bp, cfg.seed, g.trial);
  if (g.node >= p.node_count) {
    throw Error(ErrorCode::InvalidConfig, "--node " + std::to_string(g.node) + " not in a " +
                                              std::to_string(p.node_count) + "-node network");
  }
  const auto setups = make_agent_setups(p, cfg.bp.sigma2, resolve_alpha(p.edges, cfg.bp));
  const AgentSetup& setup = setups[g.node];

  std::map<NodeId, SocketAddress> peers;
  for (const std::string& spec : g.peers) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidConfig, "--peer expects id=host:port, got '" + spec + "'");
    }
    int id = -1;
    try {
      id = std::stoi(spec.substr(0, eq));
    } catch (const std::exception&) {
    }
    if (id < 0) throw Error(ErrorCode::InvalidConfig, "bad peer id in '" + spec + "'");
    peers.emplace(static_cast<NodeId>(id), SocketAddress::parse(spec.substr(eq + 1)));
  }
  std::vector<NodeId> given;
  for (const auto& [id, addr] : peers) given.push_back(id);
  if (given != setup.neighbors) {
    std::string want;
    for (NodeId n : setup.neighbors) want += (want.empty() ? "" : ",") + std::to_string(n);
    throw Error(ErrorCode::InvalidConfig, "node " + std::to_string(g.node) +
                                              " needs exactly one --peer for each of: " + want);
  }

  UdpOptions opts;
  opts.retry_interval = std::chrono::milliseconds(g.retry_ms);
  opts.max_retries = g.retries;
  auto endpoint = make_udp_endpoint(g.node, UdpSocket::bind(SocketAddress::parse(g.bind)),
                                    std::move(peers), opts);
  const int rounds = g.rounds > 0 ? g.rounds : cfg.bp.max_iters;
  const auto history = run_agent(setup, *endpoint, rounds);

  std::cout << "round,mean_x,mean_y,p_xx,p_xy,p_yy\n";
  for (std::size_t r = 0; r < history.size(); ++r) {
    const GaussianBelief& b = history[r];
    std::cout << r << ',' << format_csv_number(b.mean.x()) << ',' << format_csv_number(b.mean.y())
              << ',' << format_csv_number(b.covariance(0, 0)) << ','
              << format_csv_number(b.covariance(0, 1)) << ','
              << format_csv_number(b.covariance(1, 1)) << '\n';
  }
  const Position& truth = sc.true_positions[g.node];
  std::fprintf(stderr, "node %zu: estimate (%g, %g), truth (%g, %g)\n", g.node,
               history.back().mean.x(), history.back().mean.y(), truth.x(), truth.y());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative NLOS localization with Gaussian belief propagation"};
  app.require_subcommand(1);

  CommonArgs run_a, mc_a, cdf_a, table_a, conv_a, paper_a, agent_a;
  int run_trial = 0;
  AgentArgs agent;

  auto* run = app.add_subcommand("run", "one noise draw; prints estimated positions");
  add_scenario_flags(run, run_a);
  run->add_option("--trial", run_trial, "which trial's noise draw")->check(CLI::NonNegativeNumber);
  run->add_flag("--oracle", run_a.oracle, "include the joint least-squares solution");
  run->add_option("--out", run_a.out, "also write estimates.csv and config.json here");

  auto* mc = app.add_subcommand("montecarlo", "Monte-Carlo trials; writes every artifact");
  add_scenario_flags(mc, mc_a);
  add_trial_flags(mc, mc_a);

  auto* cdf = app.add_subcommand("cdf", "Monte-Carlo trials; writes per-trial errors and CDFs");
  add_scenario_flags(cdf, cdf_a);
  add_trial_flags(cdf, cdf_a);

  auto* table = app.add_subcommand("table", "Monte-Carlo trials; prints the mean-error table");
  add_scenario_flags(table, table_a);
  add_trial_flags(table, table_a);

  auto* conv = app.add_subcommand("convergence", "per-iteration mean absolute error");
  add_scenario_flags(conv, conv_a);
  add_trial_flags(conv, conv_a);

  auto* paper = app.add_subcommand("paper-preset",
                                   "five-node evaluation, orthogonal and biorthogonal scatters");
  add_scenario_flags(paper, paper_a);
  add_trial_flags(paper, paper_a);

  auto* ag = app.add_subcommand("agent", "run one node over UDP (multi-process mode)");
  add_scenario_flags(ag, agent_a);
  ag->add_option("--node", agent.node, "this process's node id")->required();
  ag->add_option("--bind", agent.bind, "local host:port")->required();
  ag->add_option("--peer", agent.peers, "neighbor as id=host:port (repeat per neighbor)");
  ag->add_option("--rounds", agent.rounds, "BP rounds (default: bp.max_iters)");
  ag->add_option("--trial", agent.trial, "which trial's noise draw")->check(CLI::NonNegativeNumber);
  ag->add_option("--retry-ms", agent.retry_ms, "retransmit interval")->check(CLI::PositiveNumber);
  ag->add_option("--retries", agent.retries, "retransmits before giving up")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_a, run_trial);
    if (*mc) return cmd_montecarlo(mc_a, {}, true, false);
    if (*cdf) return cmd_montecarlo(cdf_a, {true, true, false, false}, false, false);
    if (*table) return cmd_montecarlo(table_a, {false, false, true, false}, false, true);
    if (*conv) return cmd_convergence(conv_a);
    if (*paper) return cmd_paper_preset(paper_a);
    if (*ag) return cmd_agent(agent_a, agent);
  } catch (const Error& e) {
    std::cerr << "gbpl: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "gbpl: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
