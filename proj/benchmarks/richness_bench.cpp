#include <benchmark/benchmark.h>

#include "richness/adjustment.hpp"
#include "richness/bootstrap.hpp"
#include "richness/calibration.hpp"
#include "richness/estimators.hpp"
#include "richness/rng.hpp"
#include "richness/simulator.hpp"
#include "richness/survey.hpp"

namespace {

using namespace richness;

void BM_CalibrationSolve(benchmark::State& state) {
  const CalibrationRecord record{40, 35.0, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(estimate_error_rates(record));
}
BENCHMARK(BM_CalibrationSolve);

void BM_AdjustCounts(benchmark::State& state) {
  const RawCounts raw{74.0, 19.0, 9.0, 12};
  const ErrorRateEstimate rates = estimate_error_rates(CalibrationRecord{40, 35.0, 1.0});
  for (auto _ : state) benchmark::DoNotOptimize(adjust_counts(raw, rates));
}
BENCHMARK(BM_AdjustCounts);

void BM_BootstrapSe(benchmark::State& state) {
  const RawCounts raw{74.0, 19.0, 9.0, 12};
  const ErrorRateEstimate rates = estimate_error_rates(CalibrationRecord{40, 35.0, 1.0});
  const AdjustedCounts adj = adjust_counts(raw, rates);
  const double point = adjusted_estimator(adj).point;
  const CalibrationPropagation prop =
      make_calibration_propagation(CalibrationRecord{40, 35.0, 1.0}, raw);
  const BootstrapConfig cfg{static_cast<int>(state.range(0)), 7};
  for (auto _ : state) benchmark::DoNotOptimize(bootstrap_se(adj, point, cfg, prop));
}
BENCHMARK(BM_BootstrapSe)->Arg(200)->Arg(1000);

void BM_TallyFrequencies(benchmark::State& state) {
  const int s = static_cast<int>(state.range(0));
  RngStream rng(11);
  std::vector<std::string> labels(static_cast<std::size_t>(s));
  std::vector<std::vector<std::uint8_t>> rows(static_cast<std::size_t>(s));
  for (int i = 0; i < s; ++i) {
    labels[static_cast<std::size_t>(i)] = "s" + std::to_string(i);
    auto& row = rows[static_cast<std::size_t>(i)];
    row.resize(20, 0);
    row[static_cast<std::size_t>(rng.uniform_below(20))] = 1;  // at least one detection
    for (auto& cell : row)
      if (rng.bernoulli(0.4)) cell = 1;
  }
  const IncidenceMatrix m = IncidenceMatrix::create(labels, rows, 20);
  for (auto _ : state) benchmark::DoNotOptimize(tally_frequencies(m));
}
BENCHMARK(BM_TallyFrequencies)->Arg(100)->Arg(1000);

void BM_ExperimentLevel(benchmark::State& state) {
  ExperimentConfig cfg;
  cfg.s_true = 100;
  cfg.s_sub = 40;
  cfg.units = 20;
  cfg.replicates = static_cast<int>(state.range(0));
  cfg.bootstrap_trials = 200;
  cfg.detection.kind = DetectionKind::uniform01;
  cfg.e_bar_grid = {0.15};
  cfg.r = 0.91;
  cfg.master_seed = 5;
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(cfg, 1));
}
BENCHMARK(BM_ExperimentLevel)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
