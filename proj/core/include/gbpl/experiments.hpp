#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gbpl/bp.hpp"
#include "gbpl/scenario.hpp"
#include "gbpl/scenario_io.hpp"

namespace gbpl {

enum class Scheme { Cooperative, Pairwise, JointLs };

std::string_view scheme_name(Scheme scheme);

/// How cooperative trials are executed: the synchronous driver directly,
/// or the agent runtime over one of the transports (fixed max_iters rounds).
enum class Engine { Direct, InProcessAgents, UdpAgents };

/// Absolute coordinate errors, one entry per trial for each reported node.
struct ErrorSamples {
  Scheme scheme = Scheme::Cooperative;
  std::vector<NodeId> nodes;                ///< non-anchor nodes, ascending
  std::vector<std::vector<double>> abs_x;   ///< [node][trial]
  std::vector<std::vector<double>> abs_y;   ///< [node][trial]
  std::vector<std::uint64_t> trial_seeds;

  std::size_t trials() const { return trial_seeds.size(); }
};

/// Trial-averaged absolute error per BP iteration over all non-anchor nodes.
/// Trials that stopped early contribute their converged values.
struct ConvergenceTrace {
  std::vector<double> mean_abs_x;
  std::vector<double> mean_abs_y;

  std::size_t iterations() const { return mean_abs_x.size(); }
};

struct MonteCarloOptions {
  int trials = 10000;
  std::uint64_t seed = 1;
  bool cooperative = true;
  bool pairwise = true;
  bool joint_ls = false;
  bool trace = false;
  Engine engine = Engine::Direct;
  unsigned threads = 0;  ///< 0 = hardware concurrency
};

struct MonteCarloResult {
  NetworkScenario scenario;
  BpConfig bp;
  std::optional<ErrorSamples> cooperative;
  std::optional<ErrorSamples> pairwise;
  std::optional<ErrorSamples> joint_ls;
  std::optional<ConvergenceTrace> trace;
  std::vector<int> iterations;   ///< BP rounds per trial
  double max_mean_norm = 0.0;    ///< largest |mu| seen in any BP iteration
  double seconds = 0.0;

  const ErrorSamples& samples(Scheme scheme) const;
};

/// Builds the scenario from `config` (seeded by `options.seed`), then per
/// trial draws fresh measurement noise and runs the selected schemes.
/// Deterministic in (config, options.trials, options.seed) regardless of
/// thread count.
MonteCarloResult run_montecarlo(const ExperimentConfig& config, const MonteCarloOptions& options);

/// The scenario run_montecarlo builds for `seed`.
NetworkScenario build_experiment_scenario(const ExperimentConfig& config, std::uint64_t seed);

/// Trial `trial`'s noise draw on `scenario`, exactly as run_montecarlo makes it.
LocalizationProblem trial_problem(const NetworkScenario& scenario, const BpConfig& bp,
                                  std::uint64_t seed, int trial);

/// Same trials, reduced to the convergence trace of the cooperative scheme.
ConvergenceTrace convergence_trace(const ExperimentConfig& config, int trials,
                                   std::uint64_t seed);

struct CdfPoint {
  double error = 0.0;
  double fraction = 0.0;
};

/// Sorted values with cumulative fractions k/n; ties collapse to one step.
std::vector<CdfPoint> empirical_cdf(std::span<const double> values);

struct CdfSeries {
  NodeId node = 0;
  char coordinate = 'x';
  std::vector<CdfPoint> points;
};

std::vector<CdfSeries> empirical_cdf(const ErrorSamples& samples);

struct MeanErrorRow {
  Scheme scheme = Scheme::Cooperative;
  NodeId node = 0;
  double mean_abs_x = 0.0;
  double mean_abs_y = 0.0;
};

std::vector<MeanErrorRow> mean_abs_error_table(const ErrorSamples& samples);

// CSV artifacts: header row, LF endings, floats with 6 significant digits.
//   errors_<scheme>.csv : trial,seed,node,abs_err_x,abs_err_y
//   cdf_<scheme>.csv    : scheme,node,coord,error,cdf
//   mean_errors.csv     : scheme,node,mean_abs_err_x,mean_abs_err_y
//   convergence.csv     : iteration,mean_abs_err_x,mean_abs_err_y
std::string format_csv_number(double value);
void write_errors_csv(std::ostream& out, const ErrorSamples& samples);
void write_cdf_csv(std::ostream& out, Scheme scheme, const std::vector<CdfSeries>& series);
void write_mean_errors_csv(std::ostream& out, std::span<const MeanErrorRow> rows);
void write_convergence_csv(std::ostream& out, const ConvergenceTrace& trace);

/// Which artifacts `write_run_directory` emits.
struct ArtifactSelection {
  bool errors = true;
  bool cdf = true;
  bool table = true;
  bool convergence = true;
};

/// Writes config.json, the selected CSVs and run_meta.json into `dir`.
void write_run_directory(const std::filesystem::path& dir, const MonteCarloResult& result,
                         const MonteCarloOptions& options, const ArtifactSelection& what = {});

}  // namespace gbpl
