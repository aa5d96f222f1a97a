#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ioeq {

// 1 - SS_res / SS_tot with mean-centered SS_tot. Constant truth has no
// defined score and throws.
double r_squared(const std::vector<double>& pred, const std::vector<double>& truth);

struct MapeResult {
  double pct = 0.0;
  int excluded = 0;  // zero-truth rows left out of the mean
};

MapeResult mape(const std::vector<double>& pred, const std::vector<double>& truth);

// ((actual - reference) / reference) * 100; reference must be positive.
double improvement_rate(double actual, double reference);

struct DistSummary {
  double min = 0, p25 = 0, p50 = 0, p75 = 0, max = 0, mean = 0;
};

// Nearest-rank percentile summary.
DistSummary cqi_distribution(const std::vector<double>& values);

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b);

// One serialized pipeline run, as read back from its artifact directory.
struct RunData {
  std::string name;
  std::string model_kind;
  std::vector<std::string> targets;
  std::map<std::string, std::vector<double>> truth;  // per target, test rows
  std::map<std::string, std::vector<double>> pred;
  // per target: (feature, mean |phi|) in rank order
  std::map<std::string, std::vector<std::pair<std::string, double>>> importance;
  // canonical metric columns of the test rows, for the correlation table
  std::vector<std::string> metric_fields;
  std::vector<std::vector<double>> metric_columns;  // aligned with metric_fields
};

RunData load_run_dir(const std::string& dir);

struct ModelScore {
  std::string run_name;
  std::string model_kind;
  std::string target;
  double r_squared = 0.0;
  double mape_pct = 0.0;
  int mape_excluded = 0;
  double mean_prediction = 0.0;
  std::optional<DistSummary> cqi_stats;  // set for the cqi target
};

struct ImprovementRow {
  std::string run_name;
  std::string target;
  double actual_mean = 0.0;
  double reference_mean = 0.0;
  double rate_pct = 0.0;
};

struct FeatureImportanceRow {
  std::string run_name;
  std::string target;
  std::string feature;
  double mean_abs_phi = 0.0;
  int rank = 0;  // 1 = most important
};

struct ComparisonReport {
  std::string reference;
  std::vector<ModelScore> scores;            // (run, target) order
  std::vector<ImprovementRow> improvements;  // vs the reference's means
  std::vector<FeatureImportanceRow> importances;
  std::vector<std::string> corr_fields;
  std::vector<std::vector<double>> corr;  // symmetric, aligned with corr_fields
};

// Reference is a run name, or "theoretical" for the ground-truth baseline
// (the truth columns of the first run's test partition).
ComparisonReport build_comparison_report(const std::vector<RunData>& runs,
                                         const std::string& reference);

}  // namespace ioeq
