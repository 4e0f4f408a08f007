#include <cmath>
#include <numbers>
#include <vector>

#include <benchmark/benchmark.h>

#include "gbpl/agents.hpp"
#include "gbpl/bp.hpp"
#include "gbpl/experiments.hpp"
#include "gbpl/frame.hpp"
#include "gbpl/oracle.hpp"
#include "gbpl/scenario.hpp"

using namespace gbpl;

namespace {

LocalizationProblem preset_problem() {
  const ExperimentConfig cfg = paper_preset_config();
  const NetworkScenario sc = build_experiment_scenario(cfg, 1);
  return trial_problem(sc, cfg.bp, 1, 0);
}

void BM_SteeringVector(benchmark::State& state) {
  double a = 0.3, b = 2.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(steering_vector(a, b));
    a += 1e-9;
  }
}
BENCHMARK(BM_SteeringVector);

void BM_EdgeConstraint(benchmark::State& state) {
  const auto paths_per_edge = static_cast<int>(state.range(0));
  const Position si(-4.5, -1.5), sj(0, 0);
  std::vector<PathMeasurement> paths;
  for (int k = 0; k < paths_per_edge; ++k) {
    const double o = k * std::numbers::pi / (2.0 * paths_per_edge);
    Reflector r{o, 0.0};
    r.offset = std::max(r.normal().dot(si), r.normal().dot(sj)) + 2.0;
    paths.push_back(mirror_path_measurement(si, sj, r));
  }
  for (auto _ : state) benchmark::DoNotOptimize(build_edge_constraint(paths));
}
BENCHMARK(BM_EdgeConstraint)->Arg(1)->Arg(2)->Arg(3)->Arg(8);

void BM_FuseMessages(benchmark::State& state) {
  std::vector<BeliefMessage> in(static_cast<std::size_t>(state.range(0)));
  for (std::size_t k = 0; k < in.size(); ++k) {
    in[k].mean = Vec2(static_cast<double>(k), 1.0);
    in[k].covariance << 2.0 + static_cast<double>(k), 0.3, 0.3, 1.0;
  }
  for (auto _ : state) benchmark::DoNotOptimize(fuse_messages(in));
}
BENCHMARK(BM_FuseMessages)->Arg(2)->Arg(4)->Arg(16);

void BM_SyncRoundsPreset(benchmark::State& state) {
  const LocalizationProblem p = preset_problem();
  BpConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(run_sync_rounds(p, cfg));
}
BENCHMARK(BM_SyncRoundsPreset);

void BM_JointLsPreset(benchmark::State& state) {
  const LocalizationProblem p = preset_problem();
  for (auto _ : state) benchmark::DoNotOptimize(joint_ls_solve(p));
}
BENCHMARK(BM_JointLsPreset);

void BM_FrameRoundTrip(benchmark::State& state) {
  GaussianBelief b{{1.5, -2.25}, Mat2::Identity(), false};
  std::uint32_t it = 0;
  for (auto _ : state) {
    const Frame f = encode_belief_frame(3, it++, b);
    benchmark::DoNotOptimize(decode_belief_frame(f));
  }
}
BENCHMARK(BM_FrameRoundTrip);

void BM_InProcessAgents(benchmark::State& state) {
  const LocalizationProblem p = preset_problem();
  for (auto _ : state) benchmark::DoNotOptimize(run_agents_in_process(p, {}, 20));
}
BENCHMARK(BM_InProcessAgents)->Unit(benchmark::kMillisecond);

void BM_MonteCarloPreset(benchmark::State& state) {
  const ExperimentConfig cfg = paper_preset_config();
  MonteCarloOptions opt;
  opt.trials = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_montecarlo(cfg, opt));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MonteCarloPreset)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_RandomScenario(benchmark::State& state) {
  ScenarioSpec spec;
  RandomSpec layout;
  layout.node_count = static_cast<std::size_t>(state.range(0));
  // same density as the default five nodes in 10 x 10 m
  layout.arena = 10.0 * std::sqrt(static_cast<double>(state.range(0)) / 5.0);
  spec.layout = layout;
  std::uint64_t seed = 1;
  for (auto _ : state) {
    Rng rng(seed++);
    const NetworkScenario sc = build_scenario(spec, rng);
    Rng noise = rng.split(1);
    const LocalizationProblem p = build_problem(sc, noisy_measurements(sc, noise));
    benchmark::DoNotOptimize(run_sync_rounds(p, {}));
  }
}
BENCHMARK(BM_RandomScenario)->Arg(10)->Arg(30)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
