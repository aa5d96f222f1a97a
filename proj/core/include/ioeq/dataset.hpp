#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ioeq {

// One IoE service session: contextual features plus targets.
struct SessionRecord {
  double timestamp = 0.0;  // seconds since epoch
  int cell_id = 0;
  double speed_kmh = 0.0;
  double rssi_dbm = 0.0;
  double rsrp_dbm = 0.0;
  double rsrq_db = 0.0;
  double sinr_db = 0.0;
  int cqi = 0;
  double dl_mbps = 0.0;
  double ul_mbps = 0.0;
  std::optional<double> pos_x{};
  std::optional<double> pos_y{};

  // Bitmask of canonical fields whose source value was a missing-value
  // sentinel. Such rows are kept for validation but excluded from model
  // feature matrices.
  std::uint32_t missing_mask = 0;

  bool has_position() const { return pos_x.has_value() && pos_y.has_value(); }
};

struct GnbSite {
  int cell_id = 0;
  double pos_x = 0.0;
  double pos_y = 0.0;
  double tx_power_dbm = 49.0;
  double coverage_radius_m = 600.0;
};

struct DatasetSplit {
  std::vector<int> train;
  std::vector<int> test;
};

struct Dataset {
  std::vector<SessionRecord> records;
  std::vector<std::string> feature_names;  // canonical column labels
  std::optional<DatasetSplit> split{};
  std::vector<GnbSite> topology{};  // empty when no topology attached
};

// Canonical column order of the on-disk dataset format.
const std::vector<std::string>& canonical_columns();

// Index of a canonical field name within canonical_columns(); -1 if absent.
int canonical_field_index(const std::string& name);

// Numeric value of a canonical field on a record (cell_id and cqi widen to
// double; timestamp included). Throws std::out_of_range on unknown names.
double record_field(const SessionRecord& rec, const std::string& name);

// --- ingestion -------------------------------------------------------------

// Maps source trace columns onto canonical fields. File format: one
// `source_col = canonical_field[:scale]` per line; `sentinel = token` lines
// declare missing-value tokens (may repeat via sentinel, sentinel2, ...).
struct ColumnMapping {
  struct Entry {
    std::string source;
    std::string canonical;
    double scale = 1.0;
  };
  std::vector<Entry> entries;
  std::vector<std::string> sentinels;

  static ColumnMapping identity();
  static ColumnMapping parse_file(const std::string& path);
  static ColumnMapping parse_text(const std::string& text);
};

struct IngestStats {
  int rows_read = 0;
  int rows_kept = 0;
  int rows_dropped = 0;    // failed hard validation (unparseable required field)
  int rows_flagged = 0;    // kept, but with sentinel-missing fields
};

// Reads a delimited trace through a mapping. Row order is preserved; rows
// whose mapped fields fail to parse are dropped and counted; sentinel values
// set the field's missing bit instead. Throws on unreadable files, on
// mappings that reference absent source columns, and when no rows survive.
Dataset ingest_csv(const std::string& path, const ColumnMapping& mapping,
                   IngestStats* stats = nullptr);

// Canonical-format save/load. Round-trips all fields bit-exactly.
void save_dataset_csv(const std::string& path, const Dataset& ds);
Dataset load_dataset_csv(const std::string& path);

void save_sites_csv(const std::string& path, const std::vector<GnbSite>& sites);
std::vector<GnbSite> load_sites_csv(const std::string& path);

// --- validation ------------------------------------------------------------

struct Violation {
  int row;
  std::string field;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

// Range checks (non-negative speeds/rates, CQI within [0,15]), duplicate
// timestamps per cell, and cell ids missing from an attached topology.
ValidationReport validate(const Dataset& ds);

// --- split -----------------------------------------------------------------

// Deterministic seeded shuffle, then the first n_train indices train and the
// next n_test test. Same seed, same split.
void train_test_split(Dataset& ds, int n_train, int n_test, std::uint64_t seed);

// --- synthetic generation ---------------------------------------------------

struct ScenarioConfig {
  std::vector<GnbSite> sites;
  int sessions = 2206;
  double max_speed_kmh = 88.0;
  double dl_cap_mbps = 170.06;
  double ul_cap_mbps = 0.825;
  double bandwidth_hz = 20e6;
  int num_rbs = 100;
  double path_loss_exp = 3.0;        // log-distance exponent
  double path_loss_ref_db = 43.0;    // loss at ref_distance_m
  double ref_distance_m = 1.0;
  double shadowing_sigma_db = 4.0;   // log-normal shadowing
  double rate_curve_gain = 0.6;      // sigmoid slope in CQI
  double rate_curve_center = 8.0;    // sigmoid midpoint CQI
  double rate_noise_sigma = 0.15;    // multiplicative log-normal on rates
  double start_timestamp = 1.6e9;
  std::uint64_t seed = 1;

  static ScenarioConfig from_kv_file(const std::string& path);
  static ScenarioConfig from_kv_text(const std::string& text);
};

// Evenly spaced grid placement for n sites, centered on the origin.
std::vector<GnbSite> place_sites_grid(int count, double spacing_m,
                                      double tx_power_dbm,
                                      double coverage_radius_m);

// Log-distance path loss in dB at distance d (clamped below at the
// reference distance).
double path_loss_db(double distance_m, const ScenarioConfig& cfg);

// Per-resource-element received power from one site at a position, before
// shadowing. This is the quantity RSRP estimates.
double site_rsrp_dbm(const GnbSite& site, double x, double y,
                     const ScenarioConfig& cfg);

// Monotone CQI-conditioned rate curve: cap * sigmoid(gain * (cqi - center)).
double rate_curve_mbps(double cap_mbps, int cqi, const ScenarioConfig& cfg);

// Deterministic synthetic dataset: path-loss + shadowing propagation, the
// radio-metric chain for the derived fields, and CQI-conditioned rates.
Dataset synth_generate(const ScenarioConfig& cfg);

// --- summary statistics ------------------------------------------------------

struct FieldStats {
  std::string field;
  double min = 0, p25 = 0, p50 = 0, p75 = 0, max = 0, mean = 0;
};

// Exact nearest-rank order statistics per canonical numeric field.
std::vector<FieldStats> summary_stats(const Dataset& ds);

void save_stats_csv(const std::string& path, const std::vector<FieldStats>& stats);

// --- model feature extraction -------------------------------------------------

// Candidate model features in canonical order. Targets double as features
// for the models that do not predict them.
const std::vector<std::string>& model_feature_candidates();

struct FeatureMatrix {
  std::vector<std::string> feature_names;
  std::string target_name;
  std::vector<std::vector<double>> x;  // one row per usable record
  std::vector<double> y;
  std::vector<int> row_indices;        // into ds.records
  int rows_skipped_missing = 0;
};

// Builds the design matrix for one target over the given record indices.
// The target itself is never a feature; cell_id participates only when
// include_cell_id is set (tree kinds). Rows with any missing used field are
// skipped and counted.
FeatureMatrix build_features(const Dataset& ds, const std::vector<int>& rows,
                             const std::string& target, bool include_cell_id);

}  // namespace ioeq
