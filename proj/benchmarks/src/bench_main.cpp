// Microbenchmarks for the hot paths: the link-metric chain, tree-ensemble
// fitting/prediction, and exact coalition enumeration (exponential in the
// feature count, so the sweep makes the wall visible).

#include <benchmark/benchmark.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "ioeq/radio_metrics.hpp"
#include "ioeq/regressors.hpp"
#include "ioeq/rng.hpp"
#include "ioeq/shapley.hpp"

using namespace ioeq;

namespace {

std::vector<std::vector<double>> random_matrix(std::size_t rows, std::size_t cols,
                                               std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> x(rows, std::vector<double>(cols));
  for (auto& r : x) {
    for (double& v : r) v = std::floor(rng.uniform(0.0, 8.0));
  }
  return x;
}

std::vector<double> random_targets(std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> y(rows);
  for (double& v : y) v = rng.uniform(0.0, 15.0);
  return y;
}

void bm_quality_model(benchmark::State& state) {
  Rng rng(1);
  LinkBudget b;
  for (auto _ : state) {
    b.rssi_dbm = rng.uniform(-120.0, -40.0);
    benchmark::DoNotOptimize(quality_model(b));
  }
}
BENCHMARK(bm_quality_model);

void bm_fit_extra_trees(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const auto x = random_matrix(rows, 8, 2);
  const auto y = random_targets(rows, 3);
  FitConfig cfg;
  cfg.n_estimators = 50;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_ensemble(x, y, ModelKind::kExtraTrees, cfg));
  }
}
BENCHMARK(bm_fit_extra_trees)->Arg(200)->Arg(1000);

void bm_fit_gradient_boosting(benchmark::State& state) {
  const auto x = random_matrix(500, 8, 4);
  const auto y = random_targets(500, 5);
  FitConfig cfg;
  cfg.n_estimators = 50;
  cfg.max_depth = 4;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_ensemble(x, y, ModelKind::kGradientBoosting, cfg));
  }
}
BENCHMARK(bm_fit_gradient_boosting);

void bm_ensemble_predict(benchmark::State& state) {
  const auto x = random_matrix(1000, 8, 6);
  const auto y = random_targets(1000, 7);
  FitConfig cfg;
  cfg.n_estimators = 100;
  const EnsembleModel model = fit_ensemble(x, y, ModelKind::kExtraTrees, cfg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.predict(x));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 1000);
}
BENCHMARK(bm_ensemble_predict);

// cost doubles per added feature: 2^n coalitions, each averaged over the
// background rows
void bm_shapley_exact(benchmark::State& state) {
  const auto n_features = static_cast<std::size_t>(state.range(0));
  const auto x = random_matrix(64, n_features, 8);
  const auto y = random_targets(64, 9);
  FitConfig cfg;
  cfg.n_estimators = 20;
  const EnsembleModel model = fit_ensemble(x, y, ModelKind::kExtraTrees, cfg);
  const BackgroundSet bg = BackgroundSet::from_rows(x, 32, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(shapley_exact(model, x[0], bg));
  }
}
BENCHMARK(bm_shapley_exact)->Arg(4)->Arg(8)->Arg(12);

void bm_shapley_permutation(benchmark::State& state) {
  const auto x = random_matrix(64, 10, 10);
  const auto y = random_targets(64, 11);
  FitConfig cfg;
  cfg.n_estimators = 20;
  const EnsembleModel model = fit_ensemble(x, y, ModelKind::kExtraTrees, cfg);
  const BackgroundSet bg = BackgroundSet::from_rows(x, 32, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        shapley_permutation_oracle(model, x[0], bg, 200, 42));
  }
}
BENCHMARK(bm_shapley_permutation);

}  // namespace

BENCHMARK_MAIN();
