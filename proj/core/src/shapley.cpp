#include "ioeq/shapley.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ioeq/rng.hpp"

namespace ioeq {

namespace {

constexpr int kMaxExactFeatures = 20;  // 20! is the largest factorial in uint64
constexpr int kMaxExhaustiveFeatures = 8;

std::uint64_t factorial(int n) {
  std::uint64_t f = 1;
  for (int i = 2; i <= n; ++i) f *= static_cast<std::uint64_t>(i);
  return f;
}

void check_instance(const EnsembleModel& model, const std::vector<double>& instance,
                    const BackgroundSet& bg) {
  const std::size_t n = model.feature_names.size();
  if (instance.size() != n) {
    throw std::invalid_argument("attribution: instance length != model feature count");
  }
  if (bg.means.size() != n) {
    throw std::invalid_argument("attribution: background feature count != model");
  }
}

std::vector<double> hybrid_vector(const std::vector<double>& instance,
                                  const std::vector<double>& means,
                                  std::uint32_t mask) {
  std::vector<double> x(means);
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (mask & (1u << j)) x[j] = instance[j];
  }
  return x;
}

}  // namespace

BackgroundSet BackgroundSet::from_rows(const std::vector<std::vector<double>>& rows,
                                       std::size_t cap, std::uint64_t seed) {
  if (rows.empty()) {
    throw std::invalid_argument("background set: no reference rows");
  }
  if (cap == 0) {
    throw std::invalid_argument("background set: cap must be >= 1");
  }
  BackgroundSet bg;
  if (rows.size() <= cap) {
    bg.rows = rows;
  } else {
    std::vector<std::size_t> idx(rows.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    for (std::size_t i = 0; i < cap; ++i) {
      const auto j = i + rng.uniform_index(rows.size() - i);
      std::swap(idx[i], idx[j]);
    }
    idx.resize(cap);
    std::sort(idx.begin(), idx.end());
    bg.rows.reserve(cap);
    for (auto i : idx) bg.rows.push_back(rows[i]);
  }

  const std::size_t p = bg.rows[0].size();
  bg.means.assign(p, 0.0);
  for (const auto& r : bg.rows) {
    if (r.size() != p) {
      throw std::invalid_argument("background set: ragged reference rows");
    }
    for (std::size_t j = 0; j < p; ++j) bg.means[j] += r[j];
  }
  for (double& m : bg.means) {
    m /= static_cast<double>(bg.rows.size());
    if (!std::isfinite(m)) {
      throw std::invalid_argument("background set: non-finite feature mean");
    }
  }
  return bg;
}

double coalition_value(const EnsembleModel& model,
                       const std::vector<double>& instance,
                       const std::vector<int>& coalition,
                       const BackgroundSet& bg) {
  check_instance(model, instance, bg);
  std::uint32_t mask = 0;
  for (int j : coalition) {
    if (j < 0 || j >= static_cast<int>(instance.size())) {
      throw std::out_of_range("coalition: feature index " + std::to_string(j) +
                              " out of range");
    }
    mask |= 1u << static_cast<unsigned>(j);
  }
  return model.predict_one(hybrid_vector(instance, bg.means, mask));
}

double shapley_weight(int n, int c) {
  if (n < 1 || n > kMaxExactFeatures) {
    throw std::out_of_range("shapley_weight: n must be in [1, 20]");
  }
  if (c < 0 || c > n - 1) {
    throw std::out_of_range("shapley_weight: coalition size must be in [0, n-1]");
  }
  return static_cast<double>(factorial(c)) * static_cast<double>(factorial(n - 1 - c)) /
         static_cast<double>(factorial(n));
}

Explanation shapley_exact(const EnsembleModel& model,
                          const std::vector<double>& instance,
                          const BackgroundSet& bg, AttributionCounters* counters) {
  check_instance(model, instance, bg);
  const int n = static_cast<int>(instance.size());
  if (n > kMaxExactFeatures) {
    throw std::invalid_argument(
        "exact attribution enumerates 2^n coalitions and refuses n = " +
        std::to_string(n) + " > 20; use shapley_permutation_oracle instead");
  }

  const std::uint32_t full = (n == 32 ? ~0u : (1u << n) - 1u);
  std::vector<double> v(static_cast<std::size_t>(full) + 1);
  for (std::uint32_t mask = 0; mask <= full; ++mask) {
    v[mask] = model.predict_one(hybrid_vector(instance, bg.means, mask));
  }
  if (counters) {
    counters->model_evals += full + 1;
    counters->coalition_evals += full + 1;
    counters->explained_instances += 1;
  }

  std::vector<double> w(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) w[static_cast<std::size_t>(c)] = shapley_weight(n, c);

  Explanation ex;
  ex.base_value = v[0];
  ex.prediction = v[full];
  ex.instance = instance;
  ex.feature_names = model.feature_names;
  ex.phi.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    const std::uint32_t bit = 1u << static_cast<unsigned>(i);
    double acc = 0.0;
    for (std::uint32_t mask = 0; mask <= full; ++mask) {
      if (mask & bit) continue;
      acc += w[static_cast<std::size_t>(std::popcount(mask))] * (v[mask | bit] - v[mask]);
    }
    ex.phi[static_cast<std::size_t>(i)] = acc;
  }
  return ex;
}

namespace {

// Shared marginal-contribution walk; v-cache keyed by coalition mask.
class PermutationWalker {
 public:
  PermutationWalker(const EnsembleModel& model, const std::vector<double>& instance,
                    const BackgroundSet& bg, int n)
      : model_(model), instance_(instance), bg_(bg),
        cache_(std::size_t{1} << n, std::numeric_limits<double>::quiet_NaN()) {}

  double value(std::uint32_t mask) {
    double& slot = cache_[mask];
    if (std::isnan(slot)) {
      slot = model_.predict_one(hybrid_vector(instance_, bg_.means, mask));
    }
    return slot;
  }

  void accumulate(const std::vector<int>& order, std::vector<double>* phi) {
    std::uint32_t mask = 0;
    double prev = value(0);
    for (int player : order) {
      mask |= 1u << static_cast<unsigned>(player);
      const double cur = value(mask);
      (*phi)[static_cast<std::size_t>(player)] += cur - prev;
      prev = cur;
    }
  }

 private:
  const EnsembleModel& model_;
  const std::vector<double>& instance_;
  const BackgroundSet& bg_;
  std::vector<double> cache_;
};

Explanation finish_permutation_estimate(const EnsembleModel& model,
                                        const std::vector<double>& instance,
                                        PermutationWalker& walker,
                                        std::vector<double> phi, double count) {
  const auto n = instance.size();
  Explanation ex;
  ex.base_value = walker.value(0);
  ex.prediction = walker.value(n >= 32 ? ~0u : (1u << n) - 1u);
  ex.instance = instance;
  ex.feature_names = model.feature_names;
  for (double& p : phi) p /= count;
  ex.phi = std::move(phi);
  return ex;
}

}  // namespace

Explanation shapley_permutation_oracle(const EnsembleModel& model,
                                       const std::vector<double>& instance,
                                       const BackgroundSet& bg,
                                       std::uint64_t n_permutations,
                                       std::uint64_t seed) {
  check_instance(model, instance, bg);
  const int n = static_cast<int>(instance.size());
  if (n > kMaxExactFeatures) {
    throw std::invalid_argument("permutation oracle: feature count over cache guard (20)");
  }
  if (n_permutations < 1) {
    throw std::invalid_argument("permutation oracle: n_permutations must be >= 1");
  }

  PermutationWalker walker(model, instance, bg, n);
  std::vector<double> phi(static_cast<std::size_t>(n), 0.0);
  std::vector<int> order(static_cast<std::size_t>(n));
  Rng rng(seed);
  for (std::uint64_t k = 0; k < n_permutations; ++k) {
    std::iota(order.begin(), order.end(), 0);
    for (int i = n - 1; i > 0; --i) {
      const auto j = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(i) + 1));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    walker.accumulate(order, &phi);
  }
  return finish_permutation_estimate(model, instance, walker, std::move(phi),
                                     static_cast<double>(n_permutations));
}

Explanation shapley_permutation_exhaustive(const EnsembleModel& model,
                                           const std::vector<double>& instance,
                                           const BackgroundSet& bg) {
  check_instance(model, instance, bg);
  const int n = static_cast<int>(instance.size());
  if (n > kMaxExhaustiveFeatures) {
    throw std::invalid_argument(
        "exhaustive permutation walk enumerates n! orderings and refuses n > 8");
  }

  PermutationWalker walker(model, instance, bg, n);
  std::vector<double> phi(static_cast<std::size_t>(n), 0.0);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::uint64_t count = 0;
  do {
    walker.accumulate(order, &phi);
    ++count;
  } while (std::next_permutation(order.begin(), order.end()));
  return finish_permutation_estimate(model, instance, walker, std::move(phi),
                                     static_cast<double>(count));
}

std::vector<Explanation> explain_rows(const EnsembleModel& model,
                                      const std::vector<std::vector<double>>& rows,
                                      const BackgroundSet& bg,
                                      AttributionCounters* counters) {
  std::vector<Explanation> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    out.push_back(shapley_exact(model, row, bg, counters));
  }
  return out;
}

GlobalImportance global_importance(const std::vector<Explanation>& explanations) {
  if (explanations.empty()) {
    throw std::invalid_argument("global importance: no explanations");
  }
  const std::size_t p = explanations[0].phi.size();
  GlobalImportance gi;
  gi.feature_names = explanations[0].feature_names;
  gi.mean_abs_phi.assign(p, 0.0);
  for (const auto& ex : explanations) {
    if (ex.phi.size() != p) {
      throw std::invalid_argument("global importance: inconsistent feature counts");
    }
    for (std::size_t j = 0; j < p; ++j) gi.mean_abs_phi[j] += std::abs(ex.phi[j]);
  }
  for (double& v : gi.mean_abs_phi) v /= static_cast<double>(explanations.size());

  gi.rank.resize(p);
  std::iota(gi.rank.begin(), gi.rank.end(), 0);
  std::stable_sort(gi.rank.begin(), gi.rank.end(), [&gi](int a, int b) {
    return gi.mean_abs_phi[static_cast<std::size_t>(a)] >
           gi.mean_abs_phi[static_cast<std::size_t>(b)];
  });
  return gi;
}

GlobalImportance global_importance(const EnsembleModel& model,
                                   const std::vector<std::vector<double>>& rows,
                                   const BackgroundSet& bg) {
  return global_importance(explain_rows(model, rows, bg));
}

}  // namespace ioeq
