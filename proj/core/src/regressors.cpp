#include "ioeq/regressors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "ioeq/rng.hpp"

namespace ioeq {

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "linear") return ModelKind::kLinear;
  if (s == "random_forest") return ModelKind::kRandomForest;
  if (s == "extra_trees") return ModelKind::kExtraTrees;
  if (s == "gradient_boosting") return ModelKind::kGradientBoosting;
  if (s == "adaboost_r2") return ModelKind::kAdaBoostR2;
  throw std::invalid_argument("unknown model kind: " + s);
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLinear: return "linear";
    case ModelKind::kRandomForest: return "random_forest";
    case ModelKind::kExtraTrees: return "extra_trees";
    case ModelKind::kGradientBoosting: return "gradient_boosting";
    case ModelKind::kAdaBoostR2: return "adaboost_r2";
  }
  throw std::invalid_argument("unknown model kind enum value");
}

void FitConfig::validate() const {
  if (n_estimators < 1) {
    throw std::invalid_argument("fit config: n_estimators must be >= 1");
  }
  if (max_depth < -1) {
    throw std::invalid_argument("fit config: max_depth must be -1 (unlimited) or >= 0");
  }
  if (min_samples_leaf < 1) {
    throw std::invalid_argument("fit config: min_samples_leaf must be >= 1");
  }
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("fit config: learning_rate must be positive");
  }
  if (!(subsample > 0.0) || subsample > 1.0) {
    throw std::invalid_argument("fit config: subsample must be in (0, 1]");
  }
  if (!(feature_sample > 0.0) || feature_sample > 1.0) {
    throw std::invalid_argument("fit config: feature_sample must be in (0, 1]");
  }
}

double Tree::predict(const std::vector<double>& x) const {
  if (nodes.empty()) throw std::logic_error("predict on empty tree");
  int i = 0;
  while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
    const TreeNode& n = nodes[static_cast<std::size_t>(i)];
    if (static_cast<std::size_t>(n.feature) >= x.size()) {
      throw std::invalid_argument("tree predict: feature vector too short");
    }
    i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(i)].value;
}

namespace {

using Matrix = std::vector<std::vector<double>>;

void check_training_data(const Matrix& x, const std::vector<double>& y) {
  if (x.empty() || y.empty()) {
    throw std::invalid_argument("fit: empty training data");
  }
  if (x.size() != y.size()) {
    throw std::invalid_argument("fit: feature rows and target length differ");
  }
  const std::size_t p = x[0].size();
  if (p == 0) throw std::invalid_argument("fit: zero-width feature matrix");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].size() != p) {
      throw std::invalid_argument("fit: ragged feature matrix at row " +
                                  std::to_string(i));
    }
    for (double v : x[i]) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("fit: non-finite feature value at row " +
                                    std::to_string(i));
      }
    }
    if (!std::isfinite(y[i])) {
      throw std::invalid_argument("fit: non-finite target value at row " +
                                  std::to_string(i));
    }
  }
}

struct NodeStats {
  double sum = 0.0;
  double sumsq = 0.0;
  int n = 0;

  void add(double v) { sum += v; sumsq += v * v; ++n; }
  double mean() const { return sum / n; }
  double sse() const { return std::max(0.0, sumsq - sum * sum / n); }
};

struct Split {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double score = std::numeric_limits<double>::infinity();
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const std::vector<double>& y,
              const FitConfig& cfg, bool randomized, Rng& rng)
      : x_(x), y_(y), cfg_(cfg), randomized_(randomized), rng_(rng),
        p_(static_cast<int>(x[0].size())) {}

  Tree build(std::vector<int> idx) {
    Tree t;
    nodes_ = &t.nodes;
    build_node(idx, 0);
    nodes_ = nullptr;
    return t;
  }

 private:
  // Candidate features in ascending index order; a random subset when
  // feature_sample < 1 so the tie-break stays "lowest feature index".
  std::vector<int> candidate_features() {
    std::vector<int> feats(static_cast<std::size_t>(p_));
    std::iota(feats.begin(), feats.end(), 0);
    if (cfg_.feature_sample >= 1.0) return feats;
    const int k = std::max(1, static_cast<int>(cfg_.feature_sample * p_));
    for (int i = 0; i < k; ++i) {
      const auto j = i + static_cast<int>(rng_.uniform_index(
                             static_cast<std::uint64_t>(p_ - i)));
      std::swap(feats[static_cast<std::size_t>(i)], feats[static_cast<std::size_t>(j)]);
    }
    feats.resize(static_cast<std::size_t>(k));
    std::sort(feats.begin(), feats.end());
    return feats;
  }

  // Full scan over cut points between consecutive distinct sorted values.
  void best_split_exhaustive(const std::vector<int>& idx, int feature, Split* best) {
    const std::size_t m = idx.size();
    scratch_.clear();
    scratch_.reserve(m);
    for (int i : idx) {
      scratch_.emplace_back(x_[static_cast<std::size_t>(i)][static_cast<std::size_t>(feature)],
                            y_[static_cast<std::size_t>(i)]);
    }
    std::sort(scratch_.begin(), scratch_.end());

    NodeStats right;
    for (const auto& [v, t] : scratch_) right.add(t);
    NodeStats left;

    for (std::size_t k = 1; k < m; ++k) {
      const double t = scratch_[k - 1].second;
      left.add(t);
      right.sum -= t;
      right.sumsq -= t * t;
      --right.n;

      const double a = scratch_[k - 1].first;
      const double b = scratch_[k].first;
      if (a == b) continue;
      if (left.n < cfg_.min_samples_leaf || right.n < cfg_.min_samples_leaf) continue;

      const double score = left.sse() + right.sse();
      if (score < best->score) {
        double thr = 0.5 * (a + b);
        if (!(thr < b)) thr = a;  // keep the partition at "value <= thr"
        best->found = true;
        best->feature = feature;
        best->threshold = thr;
        best->score = score;
      }
    }
  }

  // One uniform threshold in [min, max) per candidate feature.
  void best_split_randomized(const std::vector<int>& idx, int feature, Split* best) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int i : idx) {
      const double v = x_[static_cast<std::size_t>(i)][static_cast<std::size_t>(feature)];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (!(lo < hi)) return;
    const double thr = rng_.uniform(lo, hi);

    NodeStats left, right;
    for (int i : idx) {
      const double t = y_[static_cast<std::size_t>(i)];
      if (x_[static_cast<std::size_t>(i)][static_cast<std::size_t>(feature)] <= thr) {
        left.add(t);
      } else {
        right.add(t);
      }
    }
    if (left.n < cfg_.min_samples_leaf || right.n < cfg_.min_samples_leaf) return;

    const double score = left.sse() + right.sse();
    if (score < best->score) {
      best->found = true;
      best->feature = feature;
      best->threshold = thr;
      best->score = score;
    }
  }

  int build_node(const std::vector<int>& idx, int depth) {
    NodeStats stats;
    for (int i : idx) stats.add(y_[static_cast<std::size_t>(i)]);

    const int me = static_cast<int>(nodes_->size());
    nodes_->push_back({});
    TreeNode& placeholder = nodes_->back();
    placeholder.value = stats.mean();
    placeholder.n_samples = stats.n;

    const bool depth_capped = cfg_.max_depth >= 0 && depth >= cfg_.max_depth;
    if (depth_capped || stats.n < 2 * cfg_.min_samples_leaf ||
        stats.sse() <= 1e-12) {
      return me;
    }

    Split best;
    for (int f : candidate_features()) {
      if (randomized_) {
        best_split_randomized(idx, f, &best);
      } else {
        best_split_exhaustive(idx, f, &best);
      }
    }
    if (!best.found) return me;

    std::vector<int> left_idx, right_idx;
    left_idx.reserve(idx.size());
    right_idx.reserve(idx.size());
    for (int i : idx) {
      if (x_[static_cast<std::size_t>(i)][static_cast<std::size_t>(best.feature)] <=
          best.threshold) {
        left_idx.push_back(i);
      } else {
        right_idx.push_back(i);
      }
    }

    const int left = build_node(left_idx, depth + 1);
    const int right = build_node(right_idx, depth + 1);
    TreeNode& node = (*nodes_)[static_cast<std::size_t>(me)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = left;
    node.right = right;
    return me;
  }

  const Matrix& x_;
  const std::vector<double>& y_;
  const FitConfig& cfg_;
  const bool randomized_;
  Rng& rng_;
  const int p_;
  std::vector<TreeNode>* nodes_ = nullptr;
  std::vector<std::pair<double, double>> scratch_;
};

std::vector<int> all_rows(std::size_t n) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

void fit_linear(const Matrix& x, const std::vector<double>& y, EnsembleModel* m) {
  const auto n = static_cast<Eigen::Index>(x.size());
  const auto p = static_cast<Eigen::Index>(x[0].size());
  Eigen::MatrixXd a(n, p + 1);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      a(i, j) = x[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    a(i, p) = 1.0;
    b(i) = y[static_cast<std::size_t>(i)];
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  const Eigen::VectorXd sol = cod.solve(b);
  m->rank_deficient = cod.rank() < p + 1;
  m->coefficients.assign(sol.data(), sol.data() + p);
  m->intercept = sol(p);
}

void fit_random_forest(const Matrix& x, const std::vector<double>& y,
                       const FitConfig& cfg, bool randomized, EnsembleModel* m) {
  const std::size_t n = x.size();
  const double w = 1.0 / cfg.n_estimators;
  for (int t = 0; t < cfg.n_estimators; ++t) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(t)));
    std::vector<int> idx;
    if (randomized) {
      idx = all_rows(n);  // Extra-Trees rule: the full sample, no bootstrap
    } else {
      idx.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        idx.push_back(static_cast<int>(rng.uniform_index(n)));
      }
    }
    m->trees.push_back(TreeBuilder(x, y, cfg, randomized, rng).build(std::move(idx)));
    m->tree_weights.push_back(w);
  }
}

void fit_gradient_boosting(const Matrix& x, const std::vector<double>& y,
                           const FitConfig& cfg, EnsembleModel* m) {
  const std::size_t n = x.size();
  m->base_score = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  std::vector<double> resid(n);
  for (std::size_t i = 0; i < n; ++i) resid[i] = y[i] - m->base_score;

  for (int t = 0; t < cfg.n_estimators; ++t) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(t)));
    std::vector<int> idx = all_rows(n);
    if (cfg.subsample < 1.0) {
      const auto k = std::max<std::size_t>(
          1, static_cast<std::size_t>(cfg.subsample * static_cast<double>(n)));
      for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + rng.uniform_index(n - i);
        std::swap(idx[i], idx[j]);
      }
      idx.resize(k);
    }
    Tree tree = TreeBuilder(x, resid, cfg, false, rng).build(std::move(idx));
    for (std::size_t i = 0; i < n; ++i) {
      resid[i] -= cfg.learning_rate * tree.predict(x[i]);
    }
    m->trees.push_back(std::move(tree));
    m->tree_weights.push_back(cfg.learning_rate);
  }
}

void fit_adaboost_r2(const Matrix& x, const std::vector<double>& y,
                     const FitConfig& cfg, EnsembleModel* m) {
  const std::size_t n = x.size();
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::vector<double> cdf(n);

  for (int t = 0; t < cfg.n_estimators; ++t) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(t)));

    std::partial_sum(w.begin(), w.end(), cdf.begin());
    const double total = cdf.back();
    std::vector<int> idx;
    idx.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = rng.uniform() * total;
      const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
      idx.push_back(static_cast<int>(it - cdf.begin()));
    }

    Tree tree = TreeBuilder(x, y, cfg, false, rng).build(std::move(idx));

    // linear loss on the full original sample
    std::vector<double> err(n);
    double err_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      err[i] = std::abs(y[i] - tree.predict(x[i]));
      err_max = std::max(err_max, err[i]);
    }
    if (err_max <= 0.0) {
      // perfect learner: keep it with a dominant weight and stop
      m->trees.push_back(std::move(tree));
      m->tree_weights.push_back(std::log(1e10));
      break;
    }

    double avg_loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      err[i] /= err_max;
      avg_loss += w[i] * err[i];
    }
    if (avg_loss >= 0.5) {
      if (m->trees.empty()) {
        m->trees.push_back(std::move(tree));
        m->tree_weights.push_back(1.0);
      }
      break;
    }

    const double beta = avg_loss / (1.0 - avg_loss);
    double wsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] *= std::pow(beta, 1.0 - err[i]);
      wsum += w[i];
    }
    for (double& wi : w) wi /= wsum;

    m->trees.push_back(std::move(tree));
    m->tree_weights.push_back(std::log(1.0 / beta));
  }
}

double weighted_median(std::vector<std::pair<double, double>>& pred_weight) {
  std::sort(pred_weight.begin(), pred_weight.end());
  double total = 0.0;
  for (const auto& [p, w] : pred_weight) total += w;
  double acc = 0.0;
  for (const auto& [p, w] : pred_weight) {
    acc += w;
    if (acc >= 0.5 * total) return p;
  }
  return pred_weight.back().first;
}

}  // namespace

Tree fit_tree(const Matrix& x, const std::vector<double>& y,
              const FitConfig& cfg, bool randomized_splits) {
  cfg.validate();
  check_training_data(x, y);
  Rng rng(cfg.seed);
  return TreeBuilder(x, y, cfg, randomized_splits, rng).build(all_rows(x.size()));
}

EnsembleModel fit_ensemble(const Matrix& x, const std::vector<double>& y,
                           ModelKind kind, const FitConfig& cfg,
                           const std::vector<std::string>& feature_names,
                           const std::string& target_name) {
  cfg.validate();
  check_training_data(x, y);

  EnsembleModel m;
  m.kind = kind;
  m.target_name = target_name;
  m.fit_seed = cfg.seed;
  m.config = cfg;
  if (feature_names.empty()) {
    for (std::size_t j = 0; j < x[0].size(); ++j) {
      m.feature_names.push_back("f" + std::to_string(j));
    }
  } else {
    if (feature_names.size() != x[0].size()) {
      throw std::invalid_argument("fit: feature_names length != feature count");
    }
    m.feature_names = feature_names;
  }

  switch (kind) {
    case ModelKind::kLinear:
      fit_linear(x, y, &m);
      break;
    case ModelKind::kRandomForest:
      fit_random_forest(x, y, cfg, false, &m);
      break;
    case ModelKind::kExtraTrees:
      fit_random_forest(x, y, cfg, true, &m);
      break;
    case ModelKind::kGradientBoosting:
      fit_gradient_boosting(x, y, cfg, &m);
      break;
    case ModelKind::kAdaBoostR2:
      fit_adaboost_r2(x, y, cfg, &m);
      break;
  }
  return m;
}

double EnsembleModel::predict_one(const std::vector<double>& x) const {
  if (x.size() != feature_names.size()) {
    throw std::invalid_argument("predict: expected " +
                                std::to_string(feature_names.size()) +
                                " features, got " + std::to_string(x.size()));
  }
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("predict: non-finite feature value");
    }
  }
  switch (kind) {
    case ModelKind::kLinear: {
      double z = intercept;
      for (std::size_t j = 0; j < coefficients.size(); ++j) z += coefficients[j] * x[j];
      return z;
    }
    case ModelKind::kRandomForest:
    case ModelKind::kExtraTrees: {
      double acc = 0.0, wsum = 0.0;
      for (std::size_t t = 0; t < trees.size(); ++t) {
        acc += tree_weights[t] * trees[t].predict(x);
        wsum += tree_weights[t];
      }
      return acc / wsum;
    }
    case ModelKind::kGradientBoosting: {
      double z = base_score;
      for (std::size_t t = 0; t < trees.size(); ++t) {
        z += tree_weights[t] * trees[t].predict(x);
      }
      return z;
    }
    case ModelKind::kAdaBoostR2: {
      std::vector<std::pair<double, double>> pw;
      pw.reserve(trees.size());
      for (std::size_t t = 0; t < trees.size(); ++t) {
        pw.emplace_back(trees[t].predict(x), tree_weights[t]);
      }
      return weighted_median(pw);
    }
  }
  throw std::logic_error("predict: unknown model kind");
}

std::vector<double> EnsembleModel::predict(const Matrix& x) const {
  std::vector<double> out;
  out.reserve(x.size());
  for (const auto& row : x) out.push_back(predict_one(row));
  return out;
}

double training_loss(const std::vector<double>& predictions,
                     const std::vector<double>& targets) {
  if (predictions.size() != targets.size() || predictions.empty()) {
    throw std::invalid_argument("training_loss: length mismatch or empty");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double r = targets[i] - predictions[i];
    acc += r * r;
  }
  return acc / (2.0 * static_cast<double>(targets.size()));
}

double signed_error_sum(const std::vector<double>& predictions,
                        const std::vector<double>& targets) {
  if (predictions.size() != targets.size() || predictions.empty()) {
    throw std::invalid_argument("signed_error_sum: length mismatch or empty");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    acc += targets[i] - predictions[i];
  }
  return acc / (2.0 * static_cast<double>(targets.size()));
}

// --- serialization --------------------------------------------------------------

namespace {

constexpr int kModelFormatVersion = 1;

std::string hexf(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::hex);
  return std::string(buf, r.ptr);
}

class TokenReader {
 public:
  explicit TokenReader(const std::string& text) {
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) tokens_.push_back(tok);
  }

  const std::string& next(const char* what) {
    if (pos_ >= tokens_.size()) {
      throw std::runtime_error(std::string("model file truncated: expected ") + what);
    }
    return tokens_[pos_++];
  }

  void expect(const char* literal) {
    const std::string& t = next(literal);
    if (t != literal) {
      throw std::runtime_error(std::string("model file: expected '") + literal +
                               "', found '" + t + "'");
    }
  }

  long long next_int(const char* what) {
    const std::string& t = next(what);
    long long v = 0;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size()) {
      throw std::runtime_error(std::string("model file: bad integer for ") + what +
                               ": '" + t + "'");
    }
    return v;
  }

  double next_hexf(const char* what) {
    const std::string& t = next(what);
    double v = 0.0;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v,
                                   std::chars_format::hex);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size()) {
      throw std::runtime_error(std::string("model file: bad hex float for ") + what +
                               ": '" + t + "'");
    }
    return v;
  }

 private:
  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_model(const std::string& path, const EnsembleModel& m) {
  std::ostringstream out;
  out << "ioeq-model " << kModelFormatVersion << "\n";
  out << "kind " << to_string(m.kind) << "\n";
  out << "target " << (m.target_name.empty() ? "-" : m.target_name) << "\n";
  out << "features " << m.feature_names.size();
  for (const auto& f : m.feature_names) out << ' ' << f;
  out << "\n";
  out << "fit_seed " << m.fit_seed << "\n";
  out << "n_estimators " << m.config.n_estimators << "\n";
  out << "max_depth " << m.config.max_depth << "\n";
  out << "min_samples_leaf " << m.config.min_samples_leaf << "\n";
  out << "learning_rate " << hexf(m.config.learning_rate) << "\n";
  out << "subsample " << hexf(m.config.subsample) << "\n";
  out << "feature_sample " << hexf(m.config.feature_sample) << "\n";
  out << "rank_deficient " << (m.rank_deficient ? 1 : 0) << "\n";
  out << "base_score " << hexf(m.base_score) << "\n";
  out << "intercept " << hexf(m.intercept) << "\n";
  out << "coefficients " << m.coefficients.size();
  for (double c : m.coefficients) out << ' ' << hexf(c);
  out << "\n";
  out << "tree_weights " << m.tree_weights.size();
  for (double w : m.tree_weights) out << ' ' << hexf(w);
  out << "\n";
  out << "trees " << m.trees.size() << "\n";
  for (const auto& t : m.trees) {
    out << "tree " << t.nodes.size() << "\n";
    for (const auto& n : t.nodes) {
      out << n.feature << ' ' << hexf(n.threshold) << ' ' << n.left << ' '
          << n.right << ' ' << hexf(n.value) << ' ' << n.n_samples << "\n";
    }
  }
  out << "end\n";

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write model file: " + path);
  f << out.str();
}

EnsembleModel load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open model file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  TokenReader r(buf.str());

  r.expect("ioeq-model");
  const auto version = r.next_int("format version");
  if (version != kModelFormatVersion) {
    throw std::runtime_error("model format version " + std::to_string(version) +
                             " not supported; this build reads version " +
                             std::to_string(kModelFormatVersion));
  }

  EnsembleModel m;
  r.expect("kind");
  m.kind = model_kind_from_string(r.next("model kind"));
  r.expect("target");
  const std::string target = r.next("target name");
  m.target_name = target == "-" ? "" : target;
  r.expect("features");
  const auto n_features = r.next_int("feature count");
  for (long long i = 0; i < n_features; ++i) {
    m.feature_names.push_back(r.next("feature name"));
  }
  r.expect("fit_seed");
  m.fit_seed = static_cast<std::uint64_t>(r.next_int("fit seed"));
  r.expect("n_estimators");
  m.config.n_estimators = static_cast<int>(r.next_int("n_estimators"));
  r.expect("max_depth");
  m.config.max_depth = static_cast<int>(r.next_int("max_depth"));
  r.expect("min_samples_leaf");
  m.config.min_samples_leaf = static_cast<int>(r.next_int("min_samples_leaf"));
  r.expect("learning_rate");
  m.config.learning_rate = r.next_hexf("learning_rate");
  r.expect("subsample");
  m.config.subsample = r.next_hexf("subsample");
  r.expect("feature_sample");
  m.config.feature_sample = r.next_hexf("feature_sample");
  m.config.seed = m.fit_seed;
  r.expect("rank_deficient");
  m.rank_deficient = r.next_int("rank_deficient flag") != 0;
  r.expect("base_score");
  m.base_score = r.next_hexf("base_score");
  r.expect("intercept");
  m.intercept = r.next_hexf("intercept");
  r.expect("coefficients");
  const auto n_coef = r.next_int("coefficient count");
  for (long long i = 0; i < n_coef; ++i) {
    m.coefficients.push_back(r.next_hexf("coefficient"));
  }
  r.expect("tree_weights");
  const auto n_weights = r.next_int("tree weight count");
  for (long long i = 0; i < n_weights; ++i) {
    m.tree_weights.push_back(r.next_hexf("tree weight"));
  }
  r.expect("trees");
  const auto n_trees = r.next_int("tree count");
  if (n_trees != n_weights) {
    throw std::runtime_error("model file: tree count does not match weight count");
  }
  for (long long t = 0; t < n_trees; ++t) {
    r.expect("tree");
    const auto n_nodes = r.next_int("node count");
    Tree tree;
    for (long long i = 0; i < n_nodes; ++i) {
      TreeNode n;
      n.feature = static_cast<int>(r.next_int("node feature"));
      n.threshold = r.next_hexf("node threshold");
      n.left = static_cast<int>(r.next_int("node left child"));
      n.right = static_cast<int>(r.next_int("node right child"));
      n.value = r.next_hexf("node value");
      n.n_samples = static_cast<int>(r.next_int("node sample count"));
      if (!n.is_leaf() &&
          (n.left < 0 || n.right < 0 || n.left >= n_nodes || n.right >= n_nodes)) {
        throw std::runtime_error("model file: child index out of range");
      }
      tree.nodes.push_back(n);
    }
    if (tree.nodes.empty()) {
      throw std::runtime_error("model file: empty tree");
    }
    m.trees.push_back(std::move(tree));
  }
  r.expect("end");
  return m;
}

}  // namespace ioeq
