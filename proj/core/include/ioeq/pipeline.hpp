#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ioeq/dataset.hpp"
#include "ioeq/manifest.hpp"
#include "ioeq/radio_metrics.hpp"
#include "ioeq/regressors.hpp"
#include "ioeq/shapley.hpp"

namespace ioeq {

enum class MobilityMode {
  kCoverage,  // pass iff displacement <= h_max: user stays in signal range
  kLiteral,   // pass iff displacement >= h_max, the inequality as typeset
};

MobilityMode mobility_mode_from_string(const std::string& s);
std::string to_string(MobilityMode mode);

struct PipelineConfig {
  double omega_dbm = -110.0;  // minimum serving RSRP
  double zeta_db = -12.0;     // minimum serving RSRQ
  double h_max_m = 1000.0;    // mobility displacement threshold
  double delta_t_hours = 0.01;
  MobilityMode mobility_mode = MobilityMode::kCoverage;

  ModelKind kind = ModelKind::kExtraTrees;
  FitConfig fit;
  std::vector<std::string> targets = {"cqi", "dl_mbps", "ul_mbps"};
  std::size_t background_cap = 200;  // BackgroundSet row cap
  std::size_t explain_cap = 64;      // test rows attributed per target
  std::uint64_t seed = 1;

  // propagation model for position-based association
  double path_loss_exp = 3.0;
  double path_loss_ref_db = 43.0;
  double ref_distance_m = 1.0;
  int num_rbs = 100;
  double bandwidth_hz = 20e6;
  RsrqMode rsrq_mode = RsrqMode::kLinearDomain;

  void validate() const;
  static PipelineConfig from_kv_text(const std::string& text);
  static PipelineConfig from_kv_file(const std::string& path);
};

// displacement_m = speed_kmh * delta_t_hours * 1000.
bool check_mobility_constraint(double speed_kmh, double delta_t_hours,
                               double h_max_m, MobilityMode mode);

// Signal strength of one candidate cell as seen by one user.
struct CellSignal {
  int cell_id = 0;
  double rsrp_dbm = 0.0;
  double rsrq_db = 0.0;
};

struct UserAssociation {
  int record_index = -1;
  int cell_id = -1;  // -1 while unassociated
  double rsrp_dbm = 0.0;
  double rsrq_db = 0.0;
  bool rsrp_ok = false;
  bool rsrq_ok = false;
  bool mobility_ok = false;

  bool associated() const { return cell_id >= 0; }
};

struct AssociationDecision {
  std::vector<UserAssociation> users;  // one per record, record order
  int n_associated = 0;
};

// Candidate = argmax RSRP (ties to the lowest cell_id); granted only when
// RSRP >= omega, RSRQ >= zeta, and the mobility check passes.
UserAssociation associate_one(const std::vector<CellSignal>& signals,
                              double speed_kmh, const PipelineConfig& cfg);

AssociationDecision associate_users(const Dataset& ds,
                                    const std::vector<GnbSite>& topology,
                                    const PipelineConfig& cfg);

struct TargetResult {
  std::string target;
  EnsembleModel model;
  std::vector<int> train_rows;  // fitting cohort (associated train rows)
  std::vector<double> train_predictions;
  std::vector<double> train_truths;
  double train_loss = 0.0;        // squared-residual loss on the cohort
  double train_signed_sum = 0.0;  // signed-residual diagnostic
  std::vector<int> test_rows;
  std::vector<double> predictions;  // clamped >= 0
  std::vector<double> truths;
  std::vector<int> explained_rows;
  std::vector<Explanation> explanations;
  GlobalImportance importance;
};

struct PipelineOutput {
  AssociationDecision associations;
  std::vector<TargetResult> targets;
  double training_loss = 0.0;     // quality-model (cqi) cohort loss
  double objective = 0.0;         // sum of predicted CQI over associated test rows
  double objective_truth = 0.0;   // same sum over ground-truth CQI
  AttributionCounters counters;   // coalition/model-eval accounting
  std::uint64_t model_evals = 0;  // every model call, predictions included
};

PipelineOutput run_pipeline(const Dataset& ds, const PipelineConfig& cfg);

// Sum of predicted CQI over associated test rows; 0 when none.
double objective_value(const PipelineOutput& out);

// Writes associations.csv, predictions.csv, coefficients.csv,
// explanations.csv, metrics.csv, and manifest.txt into `dir`.
void save_pipeline_output(const std::string& dir, const PipelineOutput& out,
                          const Dataset& ds, const PipelineConfig& cfg,
                          RunManifest* manifest = nullptr);

}  // namespace ioeq
