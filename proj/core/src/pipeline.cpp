#include "ioeq/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <stdexcept>

#include "ioeq/csv.hpp"
#include "ioeq/rng.hpp"

namespace ioeq {

MobilityMode mobility_mode_from_string(const std::string& s) {
  if (s == "coverage") return MobilityMode::kCoverage;
  if (s == "literal") return MobilityMode::kLiteral;
  throw std::invalid_argument("unknown mobility mode: " + s);
}

std::string to_string(MobilityMode mode) {
  return mode == MobilityMode::kCoverage ? "coverage" : "literal";
}

void PipelineConfig::validate() const {
  if (!(h_max_m > 0.0)) {
    throw std::invalid_argument("pipeline config: h_max_m must be positive");
  }
  if (!(delta_t_hours > 0.0)) {
    throw std::invalid_argument("pipeline config: delta_t_hours must be positive");
  }
  if (targets.empty()) {
    throw std::invalid_argument("pipeline config: no prediction targets");
  }
  const auto& candidates = model_feature_candidates();
  std::set<std::string> seen;
  for (const auto& t : targets) {
    if (std::find(candidates.begin(), candidates.end(), t) == candidates.end()) {
      throw std::invalid_argument("pipeline config: unknown target " + t);
    }
    if (!seen.insert(t).second) {
      throw std::invalid_argument("pipeline config: duplicate target " + t);
    }
  }
  if (background_cap < 1) {
    throw std::invalid_argument("pipeline config: background_cap must be >= 1");
  }
  if (explain_cap < 1) {
    throw std::invalid_argument("pipeline config: explain_cap must be >= 1");
  }
  if (num_rbs < 1) {
    throw std::invalid_argument("pipeline config: num_rbs must be >= 1");
  }
  if (!(bandwidth_hz > 0.0)) {
    throw std::invalid_argument("pipeline config: bandwidth_hz must be positive");
  }
  if (!(ref_distance_m > 0.0)) {
    throw std::invalid_argument("pipeline config: ref_distance_m must be positive");
  }
  fit.validate();
}

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ' || c == ',') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace

PipelineConfig PipelineConfig::from_kv_text(const std::string& text) {
  const KvFile kv = KvFile::parse_text(text);
  PipelineConfig cfg;
  cfg.omega_dbm = kv.get_double_or("omega_dbm", cfg.omega_dbm);
  cfg.zeta_db = kv.get_double_or("zeta_db", cfg.zeta_db);
  cfg.h_max_m = kv.get_double_or("h_max_m", cfg.h_max_m);
  cfg.delta_t_hours = kv.get_double_or("delta_t_hours", cfg.delta_t_hours);
  if (kv.has("mobility_mode")) {
    cfg.mobility_mode = mobility_mode_from_string(kv.get("mobility_mode"));
  }
  if (kv.has("model_kind")) {
    cfg.kind = model_kind_from_string(kv.get("model_kind"));
  }
  cfg.seed = static_cast<std::uint64_t>(
      kv.get_int_or("seed", static_cast<long long>(cfg.seed)));
  cfg.fit.n_estimators =
      static_cast<int>(kv.get_int_or("n_estimators", cfg.fit.n_estimators));
  cfg.fit.max_depth = static_cast<int>(kv.get_int_or("max_depth", cfg.fit.max_depth));
  cfg.fit.min_samples_leaf =
      static_cast<int>(kv.get_int_or("min_samples_leaf", cfg.fit.min_samples_leaf));
  cfg.fit.learning_rate = kv.get_double_or("learning_rate", cfg.fit.learning_rate);
  cfg.fit.subsample = kv.get_double_or("subsample", cfg.fit.subsample);
  cfg.fit.feature_sample = kv.get_double_or("feature_sample", cfg.fit.feature_sample);
  cfg.fit.seed = cfg.seed;
  if (kv.has("targets")) {
    cfg.targets = split_list(kv.get("targets"));
  }
  cfg.background_cap = static_cast<std::size_t>(
      kv.get_int_or("background_cap", static_cast<long long>(cfg.background_cap)));
  cfg.explain_cap = static_cast<std::size_t>(
      kv.get_int_or("explain_cap", static_cast<long long>(cfg.explain_cap)));
  cfg.path_loss_exp = kv.get_double_or("path_loss_exp", cfg.path_loss_exp);
  cfg.path_loss_ref_db = kv.get_double_or("path_loss_ref_db", cfg.path_loss_ref_db);
  cfg.ref_distance_m = kv.get_double_or("ref_distance_m", cfg.ref_distance_m);
  cfg.num_rbs = static_cast<int>(kv.get_int_or("num_rbs", cfg.num_rbs));
  cfg.bandwidth_hz = kv.get_double_or("bandwidth_hz", cfg.bandwidth_hz);
  if (kv.has("rsrq_mode")) {
    const std::string mode = kv.get("rsrq_mode");
    if (mode == "linear_domain") {
      cfg.rsrq_mode = RsrqMode::kLinearDomain;
    } else if (mode == "literal_db") {
      cfg.rsrq_mode = RsrqMode::kLiteralDb;
    } else {
      throw std::invalid_argument("pipeline config: unknown rsrq_mode " + mode);
    }
  }
  return cfg;
}

PipelineConfig PipelineConfig::from_kv_file(const std::string& path) {
  const KvFile kv = KvFile::parse_file(path);
  return from_kv_text(kv.serialize());
}

bool check_mobility_constraint(double speed_kmh, double delta_t_hours,
                               double h_max_m, MobilityMode mode) {
  const double displacement_m = speed_kmh * delta_t_hours * 1000.0;
  if (mode == MobilityMode::kCoverage) return displacement_m <= h_max_m;
  return displacement_m >= h_max_m;
}

UserAssociation associate_one(const std::vector<CellSignal>& signals,
                              double speed_kmh, const PipelineConfig& cfg) {
  if (signals.empty()) {
    throw std::invalid_argument("associate_one: no candidate cells");
  }
  const CellSignal* best = &signals[0];
  for (const auto& s : signals) {
    if (s.rsrp_dbm > best->rsrp_dbm ||
        (s.rsrp_dbm == best->rsrp_dbm && s.cell_id < best->cell_id)) {
      best = &s;
    }
  }
  UserAssociation ua;
  ua.rsrp_dbm = best->rsrp_dbm;
  ua.rsrq_db = best->rsrq_db;
  ua.rsrp_ok = best->rsrp_dbm >= cfg.omega_dbm;
  ua.rsrq_ok = best->rsrq_db >= cfg.zeta_db;
  ua.mobility_ok = check_mobility_constraint(speed_kmh, cfg.delta_t_hours,
                                             cfg.h_max_m, cfg.mobility_mode);
  if (ua.rsrp_ok && ua.rsrq_ok && ua.mobility_ok) ua.cell_id = best->cell_id;
  return ua;
}

namespace {

bool field_missing(const SessionRecord& rec, const char* name) {
  const int fi = canonical_field_index(name);
  return (rec.missing_mask & (1u << static_cast<unsigned>(fi))) != 0;
}

}  // namespace

AssociationDecision associate_users(const Dataset& ds,
                                    const std::vector<GnbSite>& topology,
                                    const PipelineConfig& cfg) {
  // propagation parameters for the position-based signal audit
  ScenarioConfig prop;
  prop.path_loss_exp = cfg.path_loss_exp;
  prop.path_loss_ref_db = cfg.path_loss_ref_db;
  prop.ref_distance_m = cfg.ref_distance_m;
  prop.num_rbs = cfg.num_rbs;
  const double re_to_wideband_db = 10.0 * std::log10(12.0 * cfg.num_rbs);

  AssociationDecision decision;
  decision.users.reserve(ds.records.size());

  std::vector<CellSignal> signals;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const SessionRecord& rec = ds.records[i];
    signals.clear();

    if (rec.has_position()) {
      if (topology.empty()) {
        throw std::invalid_argument(
            "associate_users: record has a position but no gNB topology given");
      }
      // per-site RSRP from the propagation model; shared wideband RSSI
      double rssi_dbm;
      if (topology.size() == 1) {
        rssi_dbm = site_rsrp_dbm(topology[0], *rec.pos_x, *rec.pos_y, prop) +
                   re_to_wideband_db;
      } else {
        double total_mw = 0.0;
        for (const auto& site : topology) {
          total_mw += dbm_to_mw(site_rsrp_dbm(site, *rec.pos_x, *rec.pos_y, prop) +
                                re_to_wideband_db);
        }
        rssi_dbm = mw_to_dbm(total_mw);
      }
      for (const auto& site : topology) {
        CellSignal s;
        s.cell_id = site.cell_id;
        s.rsrp_dbm = site_rsrp_dbm(site, *rec.pos_x, *rec.pos_y, prop);
        s.rsrq_db = rsrq(rssi_dbm, s.rsrp_dbm, cfg.num_rbs, cfg.rsrq_mode);
        signals.push_back(s);
      }
    } else {
      if (field_missing(rec, "rsrp_dbm") || field_missing(rec, "rsrq_db") ||
          field_missing(rec, "cell_id")) {
        throw std::invalid_argument(
            "associate_users: record " + std::to_string(i) +
            " has neither a position nor recorded serving-cell signal");
      }
      signals.push_back({rec.cell_id, rec.rsrp_dbm, rec.rsrq_db});
    }

    const double speed = field_missing(rec, "speed_kmh") ? 0.0 : rec.speed_kmh;
    UserAssociation ua = associate_one(signals, speed, cfg);
    ua.record_index = static_cast<int>(i);
    if (ua.associated()) ++decision.n_associated;
    decision.users.push_back(ua);
  }
  return decision;
}

namespace {

// Internal-consistency audit: every granted association must carry all three
// constraint flags; violations are bugs, not data conditions.
void audit_feasibility(const AssociationDecision& decision) {
  for (const auto& ua : decision.users) {
    if (ua.associated() && !(ua.rsrp_ok && ua.rsrq_ok && ua.mobility_ok)) {
      throw std::logic_error("feasibility audit: granted association violates "
                             "constraints at record " +
                             std::to_string(ua.record_index));
    }
  }
}

}  // namespace

PipelineOutput run_pipeline(const Dataset& ds, const PipelineConfig& cfg) {
  cfg.validate();
  if (!ds.split) {
    throw std::runtime_error(
        "dataset carries no train/test partition; run train_test_split first");
  }

  PipelineOutput out;
  out.associations = associate_users(ds, ds.topology, cfg);
  audit_feasibility(out.associations);

  std::vector<int> cohort;
  for (int row : ds.split->train) {
    if (out.associations.users[static_cast<std::size_t>(row)].associated()) {
      cohort.push_back(row);
    }
  }
  if (cohort.empty()) {
    throw std::runtime_error(
        "no associated users in the training partition: empty fitting cohort");
  }

  const bool include_cell_id = cfg.kind != ModelKind::kLinear;
  for (std::size_t ti = 0; ti < cfg.targets.size(); ++ti) {
    const std::string& target = cfg.targets[ti];
    TargetResult res;
    res.target = target;

    FeatureMatrix train_fm = build_features(ds, cohort, target, include_cell_id);
    if (train_fm.x.empty()) {
      throw std::runtime_error("fitting cohort for " + target +
                               " is empty after dropping incomplete rows");
    }
    FitConfig fit = cfg.fit;
    fit.seed = derive_seed(cfg.seed, ti);
    res.model = fit_ensemble(train_fm.x, train_fm.y, cfg.kind, fit,
                             train_fm.feature_names, target);
    res.train_rows = train_fm.row_indices;
    res.train_truths = train_fm.y;
    res.train_predictions = res.model.predict(train_fm.x);
    out.model_evals += train_fm.x.size();
    res.train_loss = training_loss(res.train_predictions, res.train_truths);
    res.train_signed_sum = signed_error_sum(res.train_predictions, res.train_truths);

    FeatureMatrix test_fm = build_features(ds, ds.split->test, target, include_cell_id);
    res.test_rows = test_fm.row_indices;
    res.truths = test_fm.y;
    res.predictions = res.model.predict(test_fm.x);
    out.model_evals += test_fm.x.size();
    for (double& p : res.predictions) p = std::max(0.0, p);

    const BackgroundSet bg = BackgroundSet::from_rows(
        train_fm.x, cfg.background_cap, derive_seed(cfg.seed, 1000 + ti));
    const std::size_t n_explain = std::min(cfg.explain_cap, test_fm.x.size());
    res.explained_rows.assign(test_fm.row_indices.begin(),
                              test_fm.row_indices.begin() +
                                  static_cast<std::ptrdiff_t>(n_explain));
    const std::vector<std::vector<double>> explain_x(
        test_fm.x.begin(), test_fm.x.begin() + static_cast<std::ptrdiff_t>(n_explain));
    res.explanations = explain_rows(res.model, explain_x, bg, &out.counters);
    res.importance = global_importance(res.explanations);

    out.targets.push_back(std::move(res));
  }
  out.model_evals += out.counters.model_evals;

  out.training_loss = out.targets[0].train_loss;
  for (const auto& t : out.targets) {
    if (t.target == "cqi") out.training_loss = t.train_loss;
  }

  out.objective = objective_value(out);
  for (const auto& t : out.targets) {
    if (t.target != "cqi") continue;
    for (std::size_t k = 0; k < t.test_rows.size(); ++k) {
      const auto row = static_cast<std::size_t>(t.test_rows[k]);
      if (out.associations.users[row].associated()) {
        out.objective_truth += t.truths[k];
      }
    }
  }
  return out;
}

double objective_value(const PipelineOutput& out) {
  double acc = 0.0;
  for (const auto& t : out.targets) {
    if (t.target != "cqi") continue;
    for (std::size_t k = 0; k < t.test_rows.size(); ++k) {
      const auto row = static_cast<std::size_t>(t.test_rows[k]);
      if (out.associations.users[row].associated()) {
        acc += t.predictions[k];
      }
    }
  }
  return acc;
}

// --- artifact serialization --------------------------------------------------------

void save_pipeline_output(const std::string& dir, const PipelineOutput& out,
                          const Dataset& ds, const PipelineConfig& cfg,
                          RunManifest* manifest) {
  std::filesystem::create_directories(dir);

  {
    CsvTable t;
    t.header = {"record",  "cell_id", "rsrp_dbm",    "rsrq_db",
                "rsrp_ok", "rsrq_ok", "mobility_ok", "z"};
    for (const auto& ua : out.associations.users) {
      t.rows.push_back({std::to_string(ua.record_index), std::to_string(ua.cell_id),
                        format_double(ua.rsrp_dbm), format_double(ua.rsrq_db),
                        ua.rsrp_ok ? "1" : "0", ua.rsrq_ok ? "1" : "0",
                        ua.mobility_ok ? "1" : "0", ua.associated() ? "1" : "0"});
    }
    write_csv(dir + "/associations.csv", t);
  }

  {
    // all targets predict the same test rows; anything else is a bug
    for (const auto& t : out.targets) {
      if (t.test_rows != out.targets[0].test_rows) {
        throw std::logic_error("pipeline targets disagree on test rows");
      }
    }
    CsvTable t;
    t.header = {"record"};
    for (const auto& res : out.targets) {
      t.header.push_back(res.target + "_true");
      t.header.push_back(res.target + "_pred");
    }
    const auto& rows = out.targets[0].test_rows;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      std::vector<std::string> row{std::to_string(rows[k])};
      for (const auto& res : out.targets) {
        row.push_back(format_double(res.truths[k]));
        row.push_back(format_double(res.predictions[k]));
      }
      t.rows.push_back(std::move(row));
    }
    write_csv(dir + "/predictions.csv", t);
  }

  {
    CsvTable t;
    t.header = {"target", "feature", "mean_abs_phi", "rank"};
    for (const auto& res : out.targets) {
      int rank = 1;
      for (int j : res.importance.rank) {
        t.rows.push_back({res.target,
                          res.importance.feature_names[static_cast<std::size_t>(j)],
                          format_double(
                              res.importance.mean_abs_phi[static_cast<std::size_t>(j)]),
                          std::to_string(rank++)});
      }
    }
    write_csv(dir + "/coefficients.csv", t);
  }

  {
    CsvTable t;
    t.header = {"target", "record", "base_value", "prediction", "feature", "phi"};
    for (const auto& res : out.targets) {
      for (std::size_t k = 0; k < res.explanations.size(); ++k) {
        const Explanation& ex = res.explanations[k];
        for (std::size_t j = 0; j < ex.phi.size(); ++j) {
          t.rows.push_back({res.target, std::to_string(res.explained_rows[k]),
                            format_double(ex.base_value), format_double(ex.prediction),
                            ex.feature_names[j], format_double(ex.phi[j])});
        }
      }
    }
    write_csv(dir + "/explanations.csv", t);
  }

  {
    static const std::vector<std::string> metric_cols = {
        "speed_kmh", "rssi_dbm", "rsrp_dbm", "rsrq_db",
        "sinr_db",   "cqi",      "dl_mbps",  "ul_mbps"};
    std::uint32_t metric_mask = 0;
    for (const auto& c : metric_cols) {
      metric_mask |= 1u << static_cast<unsigned>(canonical_field_index(c));
    }
    CsvTable t;
    t.header = {"record"};
    t.header.insert(t.header.end(), metric_cols.begin(), metric_cols.end());
    const std::vector<int> rows =
        out.targets.empty() ? std::vector<int>{} : out.targets[0].test_rows;
    for (int row : rows) {
      const SessionRecord& rec = ds.records[static_cast<std::size_t>(row)];
      if (rec.missing_mask & metric_mask) continue;
      std::vector<std::string> line{std::to_string(row)};
      for (const auto& c : metric_cols) {
        line.push_back(format_double(record_field(rec, c)));
      }
      t.rows.push_back(std::move(line));
    }
    write_csv(dir + "/metrics.csv", t);
  }

  RunManifest local;
  RunManifest& m = manifest ? *manifest : local;
  m.set("model_kind", to_string(cfg.kind));
  {
    std::string ts;
    for (const auto& t : cfg.targets) {
      if (!ts.empty()) ts += ' ';
      ts += t;
    }
    m.set("targets", ts);
  }
  m.set_int("seed", static_cast<long long>(cfg.seed));
  m.set_double("omega_dbm", cfg.omega_dbm);
  m.set_double("zeta_db", cfg.zeta_db);
  m.set_double("h_max_m", cfg.h_max_m);
  m.set_double("delta_t_hours", cfg.delta_t_hours);
  m.set("mobility_mode", to_string(cfg.mobility_mode));
  m.set_int("n_estimators", cfg.fit.n_estimators);
  m.set_int("n_associated", out.associations.n_associated);
  m.set_int("model_evals", static_cast<long long>(out.model_evals));
  m.set_int("coalition_evals", static_cast<long long>(out.counters.coalition_evals));
  m.set_int("explained_instances",
            static_cast<long long>(out.counters.explained_instances));
  m.set_double("training_loss", out.training_loss);
  m.set_double("objective", out.objective);
  m.set_double("objective_truth", out.objective_truth);
  m.record_output("associations", dir + "/associations.csv");
  m.record_output("predictions", dir + "/predictions.csv");
  m.record_output("coefficients", dir + "/coefficients.csv");
  m.record_output("explanations", dir + "/explanations.csv");
  m.record_output("metrics", dir + "/metrics.csv");
  m.save(dir + "/manifest.txt");
}

}  // namespace ioeq
