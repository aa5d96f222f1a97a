#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ioeq {

enum class ModelKind {
  kLinear,
  kRandomForest,
  kExtraTrees,
  kGradientBoosting,
  kAdaBoostR2,
};

ModelKind model_kind_from_string(const std::string& s);
std::string to_string(ModelKind kind);

struct FitConfig {
  int n_estimators = 100;
  int max_depth = -1;  // -1 = unlimited
  int min_samples_leaf = 1;
  double learning_rate = 0.1;   // gradient-boosting shrinkage
  double subsample = 1.0;       // row fraction per boosting round, (0, 1]
  double feature_sample = 1.0;  // feature fraction per split, (0, 1]
  std::uint64_t seed = 1;

  void validate() const;  // throws std::invalid_argument
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // node mean; the prediction when leaf
  int n_samples = 0;

  bool is_leaf() const { return feature < 0; }
};

// Regression tree, nodes[0] is the root.
struct Tree {
  std::vector<TreeNode> nodes;

  double predict(const std::vector<double>& x) const;
};

struct EnsembleModel {
  ModelKind kind = ModelKind::kLinear;
  std::vector<std::string> feature_names;
  std::string target_name;
  std::uint64_t fit_seed = 0;
  FitConfig config;

  // tree kinds
  std::vector<Tree> trees;
  std::vector<double> tree_weights;  // uniform 1/T | learning rate | log(1/beta_t)
  double base_score = 0.0;           // gradient-boosting offset (training mean)

  // linear kind
  double intercept = 0.0;
  std::vector<double> coefficients;
  bool rank_deficient = false;  // least squares fell back to the pseudo-inverse

  double predict_one(const std::vector<double>& x) const;
  std::vector<double> predict(const std::vector<std::vector<double>>& x) const;
};

// Single CART regression tree minimizing within-node variance. With
// randomized_splits, each candidate feature gets one uniform threshold
// between its node min and max instead of a full cut-point scan.
Tree fit_tree(const std::vector<std::vector<double>>& x,
              const std::vector<double>& y, const FitConfig& cfg,
              bool randomized_splits);

EnsembleModel fit_ensemble(const std::vector<std::vector<double>>& x,
                           const std::vector<double>& y, ModelKind kind,
                           const FitConfig& cfg,
                           const std::vector<std::string>& feature_names = {},
                           const std::string& target_name = "");

// (1 / (2K)) * sum of squared residuals.
double training_loss(const std::vector<double>& predictions,
                     const std::vector<double>& targets);

// (1 / (2K)) * sum of signed residuals. Diagnostic only: unbounded below as
// an objective, reported alongside the squared loss but never optimized.
double signed_error_sum(const std::vector<double>& predictions,
                        const std::vector<double>& targets);

// Versioned text serialization; doubles as hex floats so predict round-trips
// bit-exactly.
void save_model(const std::string& path, const EnsembleModel& model);
EnsembleModel load_model(const std::string& path);

}  // namespace ioeq
