#include "gbpl/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "gbpl/agents.hpp"
#include "gbpl/error.hpp"
#include "gbpl/oracle.hpp"
#include "gbpl/udp.hpp"
#include <nlohmann/json.hpp>

namespace gbpl {
namespace {

struct TrialOutcome {
  std::uint64_t seed = 0;
  std::vector<Vec2> coop;
  std::vector<Vec2> pairwise;
  std::vector<Vec2> joint;
  std::vector<Vec2> trace;  // mean |error| over nodes, per iteration
  int iterations = 0;
  double max_mean_norm = 0.0;
};

std::vector<NodeId> reported_nodes(const NetworkScenario& s) {
  std::vector<NodeId> out;
  for (NodeId n = 0; n < s.node_count(); ++n) {
    if (n != s.anchor) out.push_back(n);
  }
  return out;
}

std::vector<Vec2> abs_errors(const std::vector<Position>& estimate, const NetworkScenario& s,
                             const std::vector<NodeId>& nodes) {
  std::vector<Vec2> out;
  out.reserve(nodes.size());
  for (NodeId n : nodes) out.push_back((estimate[n] - s.true_positions[n]).cwiseAbs());
  return out;
}

BeliefHistory cooperative_history(const LocalizationProblem& problem, const BpConfig& bp,
                                  Engine engine) {
  switch (engine) {
    case Engine::Direct:
      return run_sync_rounds(problem, bp).iterations;
    case Engine::InProcessAgents:
      return run_agents_in_process(problem, bp, bp.max_iters);
    case Engine::UdpAgents:
      return run_agents_udp(problem, bp, bp.max_iters);
  }
  return {};
}

TrialOutcome run_trial(const NetworkScenario& scenario, const BpConfig& bp,
                       const MonteCarloOptions& options, const std::vector<NodeId>& nodes,
                       Rng rng) {
  TrialOutcome out;
  out.seed = rng.seed();
  const EdgeMeasurements noisy = noisy_measurements(scenario, rng);
  const LocalizationProblem problem = build_problem(scenario, noisy, bp.geometry);

  if (options.cooperative || options.trace) {
    const BeliefHistory history = cooperative_history(problem, bp, options.engine);
    out.iterations = static_cast<int>(history.size()) - 1;
    std::vector<Position> estimate;
    for (const BeliefMap& beliefs : history) {
      Vec2 sum = Vec2::Zero();
      for (NodeId n : nodes) {
        sum += (beliefs[n].mean - scenario.true_positions[n]).cwiseAbs();
        out.max_mean_norm = std::max(out.max_mean_norm, beliefs[n].mean.norm());
      }
      if (options.trace) out.trace.push_back(sum / static_cast<double>(nodes.size()));
    }
    for (const auto& b : history.back()) estimate.push_back(b.mean);
    out.coop = abs_errors(estimate, scenario, nodes);
  }
  if (options.pairwise) out.pairwise = abs_errors(pairwise_baseline(problem), scenario, nodes);
  if (options.joint_ls) {
    out.joint = abs_errors(joint_ls_solve(problem).positions, scenario, nodes);
  }
  return out;
}

ErrorSamples collect(Scheme scheme, const std::vector<NodeId>& nodes,
                     const std::vector<TrialOutcome>& trials,
                     std::vector<Vec2> TrialOutcome::*field) {
  ErrorSamples s;
  s.scheme = scheme;
  s.nodes = nodes;
  s.abs_x.assign(nodes.size(), {});
  s.abs_y.assign(nodes.size(), {});
  for (const TrialOutcome& t : trials) {
    s.trial_seeds.push_back(t.seed);
    const auto& errs = t.*field;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      s.abs_x[k].push_back(errs[k].x());
      s.abs_y[k].push_back(errs[k].y());
    }
  }
  return s;
}

ConvergenceTrace reduce_trace(const std::vector<TrialOutcome>& trials) {
  std::size_t length = 0;
  for (const auto& t : trials) length = std::max(length, t.trace.size());
  ConvergenceTrace trace;
  for (std::size_t l = 0; l < length; ++l) {
    Vec2 sum = Vec2::Zero();
    for (const auto& t : trials) sum += t.trace[std::min(l, t.trace.size() - 1)];
    sum /= static_cast<double>(trials.size());
    trace.mean_abs_x.push_back(sum.x());
    trace.mean_abs_y.push_back(sum.y());
  }
  return trace;
}

double mean_of(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

void require_samples(const ErrorSamples& samples) {
  if (samples.nodes.empty() || samples.trials() == 0) {
    throw Error(ErrorCode::EmptySamples, "no error samples");
  }
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

}  // namespace

std::string_view scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::Cooperative: return "cooperative";
    case Scheme::Pairwise: return "pairwise";
    case Scheme::JointLs: return "joint_ls";
  }
  return "unknown";
}

const ErrorSamples& MonteCarloResult::samples(Scheme scheme) const {
  const std::optional<ErrorSamples>* s = scheme == Scheme::Cooperative ? &cooperative
                                         : scheme == Scheme::Pairwise  ? &pairwise
                                                                       : &joint_ls;
  if (!s->has_value()) {
    throw Error(ErrorCode::EmptySamples, std::string(scheme_name(scheme)) + " was not run");
  }
  return **s;
}

NetworkScenario build_experiment_scenario(const ExperimentConfig& config, std::uint64_t seed) {
  Rng scenario_rng = Rng(seed).split(0);
  NetworkScenario scenario = build_scenario(config.scenario, scenario_rng);
  scenario.seed = seed;
  return scenario;
}

LocalizationProblem trial_problem(const NetworkScenario& scenario, const BpConfig& bp,
                                  std::uint64_t seed, int trial) {
  Rng rng = Rng(seed).split(static_cast<std::uint64_t>(trial) + 1);
  return build_problem(scenario, noisy_measurements(scenario, rng), bp.geometry);
}

MonteCarloResult run_montecarlo(const ExperimentConfig& config, const MonteCarloOptions& options) {
  if (options.trials < 1) throw Error(ErrorCode::InvalidConfig, "trials must be >= 1");
  const auto start = std::chrono::steady_clock::now();

  const Rng master(options.seed);
  MonteCarloResult result;
  result.scenario = build_experiment_scenario(config, options.seed);
  result.bp = config.bp;
  const std::vector<NodeId> nodes = reported_nodes(result.scenario);

  const auto trials = static_cast<std::size_t>(options.trials);
  std::vector<TrialOutcome> outcomes(trials);
  unsigned workers = options.threads ? options.threads : std::thread::hardware_concurrency();
  workers = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(trials));
  if (options.engine != Engine::Direct) workers = 1;  // agents already spawn threads

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::size_t failed_trial = trials;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t t = next++; t < trials; t = next++) {
      try {
        outcomes[t] = run_trial(result.scenario, config.bp, options, nodes, master.split(t + 1));
      } catch (const Error& e) {
        std::lock_guard lock(error_mutex);
        if (t < failed_trial) {
          failed_trial = t;
          failure = std::make_exception_ptr(
              Error(e.code(), "trial " + std::to_string(t) + ": " + e.detail()));
        }
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);

  if (options.cooperative) {
    result.cooperative = collect(Scheme::Cooperative, nodes, outcomes, &TrialOutcome::coop);
  }
  if (options.pairwise) {
    result.pairwise = collect(Scheme::Pairwise, nodes, outcomes, &TrialOutcome::pairwise);
  }
  if (options.joint_ls) {
    result.joint_ls = collect(Scheme::JointLs, nodes, outcomes, &TrialOutcome::joint);
  }
  if (options.trace) result.trace = reduce_trace(outcomes);
  for (const auto& t : outcomes) {
    result.iterations.push_back(t.iterations);
    result.max_mean_norm = std::max(result.max_mean_norm, t.max_mean_norm);
  }
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

ConvergenceTrace convergence_trace(const ExperimentConfig& config, int trials,
                                   std::uint64_t seed) {
  MonteCarloOptions opt;
  opt.trials = trials;
  opt.seed = seed;
  opt.cooperative = false;
  opt.pairwise = false;
  opt.trace = true;
  return *run_montecarlo(config, opt).trace;
}

std::vector<CdfPoint> empirical_cdf(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptySamples, "empty sample for CDF");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<CdfPoint> out;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    // one point per distinct value, at the top of its step
    if (k + 1 < sorted.size() && sorted[k + 1] == sorted[k]) continue;
    out.push_back({sorted[k], static_cast<double>(k + 1) / n});
  }
  return out;
}

std::vector<CdfSeries> empirical_cdf(const ErrorSamples& samples) {
  require_samples(samples);
  std::vector<CdfSeries> out;
  for (std::size_t k = 0; k < samples.nodes.size(); ++k) {
    out.push_back({samples.nodes[k], 'x', empirical_cdf(samples.abs_x[k])});
    out.push_back({samples.nodes[k], 'y', empirical_cdf(samples.abs_y[k])});
  }
  return out;
}

std::vector<MeanErrorRow> mean_abs_error_table(const ErrorSamples& samples) {
  require_samples(samples);
  std::vector<MeanErrorRow> rows;
  for (std::size_t k = 0; k < samples.nodes.size(); ++k) {
    rows.push_back(
        {samples.scheme, samples.nodes[k], mean_of(samples.abs_x[k]), mean_of(samples.abs_y[k])});
  }
  return rows;
}

std::string format_csv_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

void write_errors_csv(std::ostream& out, const ErrorSamples& samples) {
  out << "trial,seed,node,abs_err_x,abs_err_y\n";
  for (std::size_t t = 0; t < samples.trials(); ++t) {
    for (std::size_t k = 0; k < samples.nodes.size(); ++k) {
      out << t << ',' << samples.trial_seeds[t] << ',' << samples.nodes[k] << ','
          << format_csv_number(samples.abs_x[k][t]) << ','
          << format_csv_number(samples.abs_y[k][t]) << '\n';
    }
  }
}

void write_cdf_csv(std::ostream& out, Scheme scheme, const std::vector<CdfSeries>& series) {
  out << "scheme,node,coord,error,cdf\n";
  for (const CdfSeries& s : series) {
    for (const CdfPoint& p : s.points) {
      out << scheme_name(scheme) << ',' << s.node << ',' << s.coordinate << ','
          << format_csv_number(p.error) << ',' << format_csv_number(p.fraction) << '\n';
    }
  }
}

void write_mean_errors_csv(std::ostream& out, std::span<const MeanErrorRow> rows) {
  out << "scheme,node,mean_abs_err_x,mean_abs_err_y\n";
  for (const MeanErrorRow& r : rows) {
    out << scheme_name(r.scheme) << ',' << r.node << ',' << format_csv_number(r.mean_abs_x) << ','
        << format_csv_number(r.mean_abs_y) << '\n';
  }
}

void write_convergence_csv(std::ostream& out, const ConvergenceTrace& trace) {
  out << "iteration,mean_abs_err_x,mean_abs_err_y\n";
  for (std::size_t l = 0; l < trace.iterations(); ++l) {
    out << l << ',' << format_csv_number(trace.mean_abs_x[l]) << ','
        << format_csv_number(trace.mean_abs_y[l]) << '\n';
  }
}

void write_run_directory(const std::filesystem::path& dir, const MonteCarloResult& result,
                         const MonteCarloOptions& options, const ArtifactSelection& what) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());

  open_output(dir / "config.json") << resolved_config_json(result.scenario, result.bp,
                                                           options.seed);

  std::vector<MeanErrorRow> table;
  for (const auto* samples : {&result.cooperative, &result.pairwise, &result.joint_ls}) {
    if (!samples->has_value()) continue;
    const ErrorSamples& s = **samples;
    const std::string name(scheme_name(s.scheme));
    if (what.errors) {
      auto out = open_output(dir / ("errors_" + name + ".csv"));
      write_errors_csv(out, s);
    }
    if (what.cdf) {
      auto out = open_output(dir / ("cdf_" + name + ".csv"));
      write_cdf_csv(out, s.scheme, empirical_cdf(s));
    }
    const auto rows = mean_abs_error_table(s);
    table.insert(table.end(), rows.begin(), rows.end());
  }
  if (what.table && !table.empty()) {
    auto out = open_output(dir / "mean_errors.csv");
    write_mean_errors_csv(out, table);
  }
  if (what.convergence && result.trace) {
    auto out = open_output(dir / "convergence.csv");
    write_convergence_csv(out, *result.trace);
  }

  nlohmann::json meta;
  meta["seed"] = options.seed;
  meta["trials"] = options.trials;
  meta["seconds"] = result.seconds;
  meta["engine"] = options.engine == Engine::Direct            ? "direct"
                   : options.engine == Engine::InProcessAgents ? "inproc"
                                                               : "udp";
  if (!result.iterations.empty()) {
    const auto [lo, hi] = std::minmax_element(result.iterations.begin(), result.iterations.end());
    double total = 0.0;
    for (int it : result.iterations) total += it;
    meta["iterations"] = {{"min", *lo},
                          {"max", *hi},
                          {"mean", total / static_cast<double>(result.iterations.size())}};
  }
  meta["max_mean_norm"] = result.max_mean_norm;
  meta["schemes"] = nlohmann::json::array();
  for (const auto* samples : {&result.cooperative, &result.pairwise, &result.joint_ls}) {
    if (samples->has_value()) meta["schemes"].push_back(scheme_name((*samples)->scheme));
  }
  open_output(dir / "run_meta.json") << meta.dump(2) << '\n';
}

}  // namespace gbpl
