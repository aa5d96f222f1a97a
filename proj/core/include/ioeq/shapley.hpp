#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ioeq/regressors.hpp"

namespace ioeq {

// Reference rows an attribution is computed against. Out-of-coalition
// features are pinned to these per-feature means (interventional masking).
struct BackgroundSet {
  std::vector<std::vector<double>> rows;
  std::vector<double> means;

  // Keeps at most `cap` rows (seeded subsample without replacement, original
  // row order preserved); means are computed over the kept rows.
  static BackgroundSet from_rows(const std::vector<std::vector<double>>& rows,
                                 std::size_t cap = 200, std::uint64_t seed = 1);
};

struct Explanation {
  double base_value = 0.0;         // expected model output over the background
  double prediction = 0.0;         // model output on the instance
  std::vector<double> phi;         // per-feature attribution, output units
  std::vector<double> instance;
  std::vector<std::string> feature_names;
};

struct GlobalImportance {
  std::vector<std::string> feature_names;
  std::vector<double> mean_abs_phi;
  std::vector<int> rank;  // feature indices, descending mean |phi|
};

struct AttributionCounters {
  std::uint64_t model_evals = 0;
  std::uint64_t coalition_evals = 0;
  std::uint64_t explained_instances = 0;
};

// Model prediction on the hybrid vector: coalition features take the
// instance's values, the rest take background means.
double coalition_value(const EnsembleModel& model,
                       const std::vector<double>& instance,
                       const std::vector<int>& coalition,
                       const BackgroundSet& bg);

// c!(n-c-1)!/n! for 0 <= c <= n-1, n <= 20.
double shapley_weight(int n, int c);

// Exact attribution by full coalition enumeration (2^n model calls, n <= 20).
Explanation shapley_exact(const EnsembleModel& model,
                          const std::vector<double>& instance,
                          const BackgroundSet& bg,
                          AttributionCounters* counters = nullptr);

// Monte-Carlo marginal contributions over sampled player orderings.
// Unbiased estimator of shapley_exact; deterministic per seed.
Explanation shapley_permutation_oracle(const EnsembleModel& model,
                                       const std::vector<double>& instance,
                                       const BackgroundSet& bg,
                                       std::uint64_t n_permutations,
                                       std::uint64_t seed);

// All n! orderings (n <= 8): the Shapley definition itself, for validation.
Explanation shapley_permutation_exhaustive(const EnsembleModel& model,
                                           const std::vector<double>& instance,
                                           const BackgroundSet& bg);

std::vector<Explanation> explain_rows(const EnsembleModel& model,
                                      const std::vector<std::vector<double>>& rows,
                                      const BackgroundSet& bg,
                                      AttributionCounters* counters = nullptr);

GlobalImportance global_importance(const std::vector<Explanation>& explanations);

GlobalImportance global_importance(const EnsembleModel& model,
                                   const std::vector<std::vector<double>>& rows,
                                   const BackgroundSet& bg);

}  // namespace ioeq
