#include "ioeq/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "ioeq/csv.hpp"
#include "ioeq/kv.hpp"
#include "ioeq/stats.hpp"

namespace ioeq {

double r_squared(const std::vector<double>& pred, const std::vector<double>& truth) {
  if (pred.size() != truth.size() || truth.size() < 2) {
    throw std::invalid_argument("r_squared: need equal lengths >= 2");
  }
  const double mean = mean_of(truth);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double r = truth[i] - pred[i];
    const double d = truth[i] - mean;
    ss_res += r * r;
    ss_tot += d * d;
  }
  if (ss_tot <= 0.0) {
    throw std::domain_error("r_squared: constant truth has no defined score");
  }
  return 1.0 - ss_res / ss_tot;
}

MapeResult mape(const std::vector<double>& pred, const std::vector<double>& truth) {
  if (pred.size() != truth.size() || truth.empty()) {
    throw std::invalid_argument("mape: need equal non-empty lengths");
  }
  MapeResult out;
  double acc = 0.0;
  int included = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == 0.0) {
      ++out.excluded;
      continue;
    }
    acc += std::abs(truth[i] - pred[i]) / std::abs(truth[i]);
    ++included;
  }
  if (included == 0) {
    throw std::domain_error("mape: every row has zero truth");
  }
  out.pct = 100.0 * acc / included;
  return out;
}

double improvement_rate(double actual, double reference) {
  if (!(reference > 0.0)) {
    throw std::domain_error("improvement_rate: reference must be positive");
  }
  return (actual - reference) / reference * 100.0;
}

DistSummary cqi_distribution(const std::vector<double>& values) {
  if (values.empty()) {
    throw std::invalid_argument("cqi_distribution: empty input");
  }
  std::vector<double> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  DistSummary s;
  s.min = sorted.front();
  s.max = sorted.back();
  s.p25 = nearest_rank(sorted, 25.0);
  s.p50 = nearest_rank(sorted, 50.0);
  s.p75 = nearest_rank(sorted, 75.0);
  s.mean = mean_of(sorted);
  return s;
}

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("pearson_correlation: need equal lengths >= 2");
  }
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) {
    throw std::domain_error("pearson_correlation: constant input");
  }
  return sab / std::sqrt(saa * sbb);
}

// --- run loading -----------------------------------------------------------------

RunData load_run_dir(const std::string& dir) {
  RunData run;
  {
    std::string trimmed = dir;
    while (!trimmed.empty() && trimmed.back() == '/') trimmed.pop_back();
    const auto slash = trimmed.find_last_of('/');
    run.name = slash == std::string::npos ? trimmed : trimmed.substr(slash + 1);
  }

  const KvFile manifest = KvFile::parse_file(dir + "/manifest.txt");
  run.model_kind = manifest.get_or("model_kind", "unknown");

  const CsvTable pred = read_csv(dir + "/predictions.csv");
  const int c_record = pred.column("record");
  if (c_record < 0) {
    throw std::runtime_error("predictions.csv lacks a record column: " + dir);
  }
  for (std::size_t j = 0; j < pred.header.size(); ++j) {
    const std::string& col = pred.header[j];
    const auto suffix = col.rfind("_true");
    if (suffix == std::string::npos || suffix + 5 != col.size()) continue;
    const std::string target = col.substr(0, suffix);
    const int c_pred = pred.column(target + "_pred");
    if (c_pred < 0) continue;
    run.targets.push_back(target);
    auto& truths = run.truth[target];
    auto& preds = run.pred[target];
    for (const auto& row : pred.rows) {
      truths.push_back(parse_double(row[j]));
      preds.push_back(parse_double(row[static_cast<std::size_t>(c_pred)]));
    }
  }
  if (run.targets.empty()) {
    throw std::runtime_error("predictions.csv has no <target>_true/_pred pairs: " + dir);
  }

  const CsvTable coef = read_csv(dir + "/coefficients.csv");
  const int c_target = coef.column("target");
  const int c_feature = coef.column("feature");
  const int c_phi = coef.column("mean_abs_phi");
  const int c_rank = coef.column("rank");
  if (c_target < 0 || c_feature < 0 || c_phi < 0 || c_rank < 0) {
    throw std::runtime_error("coefficients.csv missing required columns: " + dir);
  }
  for (const auto& row : coef.rows) {
    run.importance[row[static_cast<std::size_t>(c_target)]].emplace_back(
        row[static_cast<std::size_t>(c_feature)],
        parse_double(row[static_cast<std::size_t>(c_phi)]));
  }

  const CsvTable metrics = read_csv(dir + "/metrics.csv");
  for (std::size_t j = 0; j < metrics.header.size(); ++j) {
    if (metrics.header[j] == "record") continue;
    std::vector<double> col;
    col.reserve(metrics.rows.size());
    for (const auto& row : metrics.rows) col.push_back(parse_double(row[j]));
    run.metric_fields.push_back(metrics.header[j]);
    run.metric_columns.push_back(std::move(col));
  }
  return run;
}

// --- report assembly ---------------------------------------------------------------

ComparisonReport build_comparison_report(const std::vector<RunData>& runs,
                                         const std::string& reference) {
  if (runs.empty()) {
    throw std::invalid_argument("comparison report: no runs");
  }

  // reference means per target: a named run's predictions, or the ground
  // truth of the first run's test partition for "theoretical"
  std::map<std::string, double> ref_mean;
  if (reference == "theoretical") {
    for (const auto& [target, truths] : runs[0].truth) {
      ref_mean[target] = mean_of(truths);
    }
  } else {
    const RunData* ref = nullptr;
    for (const auto& r : runs) {
      if (r.name == reference) {
        ref = &r;
        break;
      }
    }
    if (!ref) {
      throw std::invalid_argument("comparison report: reference run '" + reference +
                                  "' not among the inputs");
    }
    for (const auto& [target, preds] : ref->pred) {
      ref_mean[target] = mean_of(preds);
    }
  }

  ComparisonReport report;
  report.reference = reference;

  for (const auto& run : runs) {
    for (const auto& target : run.targets) {
      const auto& truths = run.truth.at(target);
      const auto& preds = run.pred.at(target);

      ModelScore score;
      score.run_name = run.name;
      score.model_kind = run.model_kind;
      score.target = target;
      score.r_squared = r_squared(preds, truths);
      const MapeResult m = mape(preds, truths);
      score.mape_pct = m.pct;
      score.mape_excluded = m.excluded;
      score.mean_prediction = mean_of(preds);
      if (target == "cqi") score.cqi_stats = cqi_distribution(preds);
      report.scores.push_back(std::move(score));

      const auto it = ref_mean.find(target);
      if (it != ref_mean.end()) {
        ImprovementRow row;
        row.run_name = run.name;
        row.target = target;
        row.actual_mean = mean_of(preds);
        row.reference_mean = it->second;
        row.rate_pct = improvement_rate(row.actual_mean, row.reference_mean);
        report.improvements.push_back(row);
      }
    }

    for (const auto& [target, features] : run.importance) {
      int rank = 1;
      for (const auto& [feature, phi] : features) {
        report.importances.push_back({run.name, target, feature, phi, rank++});
      }
    }
  }

  // correlation over the first run's metric columns; constant columns yield
  // an undefined coefficient, recorded as NaN rather than a guess
  const RunData& base = runs[0];
  report.corr_fields = base.metric_fields;
  const std::size_t p = base.metric_fields.size();
  report.corr.assign(p, std::vector<double>(p, 1.0));
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i + 1; j < p; ++j) {
      double r;
      try {
        r = pearson_correlation(base.metric_columns[i], base.metric_columns[j]);
      } catch (const std::domain_error&) {
        r = std::numeric_limits<double>::quiet_NaN();
      }
      report.corr[i][j] = r;
      report.corr[j][i] = r;
    }
  }
  return report;
}

}  // namespace ioeq
