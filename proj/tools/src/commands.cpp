#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numeric>

#include "ioeq/csv.hpp"
#include "ioeq/dataset.hpp"
#include "ioeq/evaluation.hpp"
#include "ioeq/kv.hpp"
#include "ioeq/manifest.hpp"
#include "ioeq/pipeline.hpp"
#include "ioeq/regressors.hpp"
#include "ioeq/report_render.hpp"
#include "ioeq/rng.hpp"
#include "ioeq/shapley.hpp"

namespace fs = std::filesystem;

namespace ioeq::cli {

namespace {

void note(const GlobalOptions& g, const std::string& msg) {
  if (!g.quiet) std::cout << msg << "\n";
}

RunManifest start_manifest(const GlobalOptions& g, const std::string& command) {
  RunManifest m;
  m.set("command", command);
  m.set("command_line", g.command_line);
  m.set_int("seed", static_cast<long long>(g.seed));
  return m;
}

std::string require_out(const GlobalOptions& g) {
  if (g.out.empty()) {
    throw std::invalid_argument("--out <dir> is required for this command");
  }
  fs::create_directories(g.out);
  return g.out;
}

std::string require_config(const GlobalOptions& g) {
  if (g.config.empty()) {
    throw std::invalid_argument("--config <file> is required for this command");
  }
  return resolve_config_path(g.config);
}

std::vector<int> all_row_indices(const Dataset& ds) {
  std::vector<int> rows(ds.records.size());
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

}  // namespace

std::string resolve_config_path(const std::string& name) {
  if (fs::exists(name)) return name;
  if (name.find('/') == std::string::npos) {
    if (const char* dir = std::getenv("IOEQ_CONFIG_DIR")) {
      const std::string candidate = std::string(dir) + "/" + name;
      if (fs::exists(candidate)) return candidate;
    }
  }
  throw std::invalid_argument("config file not found: " + name);
}

int cmd_generate(const GlobalOptions& g, const GenerateArgs&) {
  const std::string config = require_config(g);
  const std::string out = require_out(g);

  ScenarioConfig cfg = ScenarioConfig::from_kv_file(config);
  if (g.seed_set) cfg.seed = g.seed;

  const Dataset ds = synth_generate(cfg);

  save_dataset_csv(out + "/dataset.csv", ds);
  save_sites_csv(out + "/sites.csv", ds.topology);
  save_stats_csv(out + "/stats.csv", summary_stats(ds));

  RunManifest m = start_manifest(g, "generate");
  m.set_int("seed", static_cast<long long>(cfg.seed));
  m.set_int("sessions", static_cast<long long>(ds.records.size()));
  m.set_int("sites", static_cast<long long>(ds.topology.size()));
  m.record_input("config", config);
  m.record_output("dataset", out + "/dataset.csv");
  m.record_output("sites", out + "/sites.csv");
  m.record_output("stats", out + "/stats.csv");
  m.save(out + "/manifest.txt");

  note(g, "generated " + std::to_string(ds.records.size()) + " sessions across " +
              std::to_string(ds.topology.size()) + " sites -> " + out);
  return 0;
}

int cmd_ingest(const GlobalOptions& g, const IngestArgs& a) {
  const std::string out = require_out(g);

  const ColumnMapping mapping = ColumnMapping::parse_file(a.mapping);
  IngestStats stats;
  Dataset ds = ingest_csv(a.input, mapping, &stats);
  const ValidationReport report = validate(ds);

  save_dataset_csv(out + "/dataset.csv", ds);

  RunManifest m = start_manifest(g, "ingest");
  m.set_int("rows_read", stats.rows_read);
  m.set_int("rows_kept", stats.rows_kept);
  m.set_int("rows_dropped", stats.rows_dropped);
  m.set_int("rows_flagged", stats.rows_flagged);
  m.set_int("violations", static_cast<long long>(report.violations.size()));
  m.record_input("input", a.input);
  m.record_input("mapping", a.mapping);
  m.record_output("dataset", out + "/dataset.csv");
  m.save(out + "/manifest.txt");

  note(g, "ingested " + std::to_string(stats.rows_kept) + "/" +
              std::to_string(stats.rows_read) + " rows (" +
              std::to_string(stats.rows_dropped) + " dropped, " +
              std::to_string(stats.rows_flagged) + " flagged, " +
              std::to_string(report.violations.size()) + " range violations) -> " +
              out);
  for (std::size_t i = 0; i < report.violations.size() && i < 10; ++i) {
    const Violation& v = report.violations[i];
    note(g, "  row " + std::to_string(v.row) + " " + v.field + ": " + v.message);
  }
  return 0;
}

int cmd_train(const GlobalOptions& g, const TrainArgs& a) {
  const std::string out = require_out(g);

  KvFile kv;
  std::string config;
  if (!g.config.empty()) {
    config = resolve_config_path(g.config);
    kv = KvFile::parse_file(config);
  }
  const std::string kind_name =
      !a.kind.empty() ? a.kind : kv.get_or("model_kind", "extra_trees");
  const std::string target = !a.target.empty() ? a.target : kv.get_or("target", "cqi");
  const ModelKind kind = model_kind_from_string(kind_name);

  FitConfig fit;
  fit.n_estimators = static_cast<int>(kv.get_int_or("n_estimators", fit.n_estimators));
  fit.max_depth = static_cast<int>(kv.get_int_or("max_depth", fit.max_depth));
  fit.min_samples_leaf =
      static_cast<int>(kv.get_int_or("min_samples_leaf", fit.min_samples_leaf));
  fit.learning_rate = kv.get_double_or("learning_rate", fit.learning_rate);
  fit.subsample = kv.get_double_or("subsample", fit.subsample);
  fit.feature_sample = kv.get_double_or("feature_sample", fit.feature_sample);
  fit.seed = static_cast<std::uint64_t>(
      kv.get_int_or("seed", static_cast<long long>(fit.seed)));
  if (g.seed_set) fit.seed = g.seed;

  const Dataset ds = load_dataset_csv(a.dataset);
  const bool include_cell_id = kind != ModelKind::kLinear;
  const FeatureMatrix fm = build_features(ds, all_row_indices(ds), target,
                                          include_cell_id);
  if (fm.x.empty()) {
    throw std::invalid_argument("no complete rows to fit on in " + a.dataset);
  }

  const EnsembleModel model =
      fit_ensemble(fm.x, fm.y, kind, fit, fm.feature_names, target);
  save_model(out + "/model.txt", model);

  const std::vector<double> pred = model.predict(fm.x);
  const double loss = training_loss(pred, fm.y);

  RunManifest m = start_manifest(g, "train");
  m.set("model_kind", kind_name);
  m.set("target", target);
  m.set_int("seed", static_cast<long long>(fit.seed));
  m.set_int("n_estimators", fit.n_estimators);
  m.set_int("rows_fit", static_cast<long long>(fm.x.size()));
  m.set_int("rows_skipped_missing", fm.rows_skipped_missing);
  m.set_double("training_loss", loss);
  m.set_double("signed_error_sum", signed_error_sum(pred, fm.y));
  if (model.rank_deficient) m.set_int("rank_deficient", 1);
  m.record_input("dataset", a.dataset);
  if (!config.empty()) m.record_input("config", config);
  m.record_output("model", out + "/model.txt");
  m.save(out + "/manifest.txt");

  note(g, "trained " + kind_name + " for " + target + " on " +
              std::to_string(fm.x.size()) + " rows, training loss " +
              format_double(loss) + " -> " + out + "/model.txt");
  return 0;
}

int cmd_explain(const GlobalOptions& g, const ExplainArgs& a) {
  const std::string out = require_out(g);

  KvFile kv;
  std::string config;
  if (!g.config.empty()) {
    config = resolve_config_path(g.config);
    kv = KvFile::parse_file(config);
  }
  const auto background_cap =
      static_cast<std::size_t>(kv.get_int_or("background_cap", 200));
  const auto explain_cap = static_cast<std::size_t>(kv.get_int_or("explain_cap", 0));
  std::uint64_t seed = static_cast<std::uint64_t>(kv.get_int_or("seed", 1));
  if (g.seed_set) seed = g.seed;

  const EnsembleModel model = load_model(a.model);
  const Dataset ds = load_dataset_csv(a.dataset);

  const bool include_cell_id =
      std::find(model.feature_names.begin(), model.feature_names.end(), "cell_id") !=
      model.feature_names.end();
  const FeatureMatrix fm =
      build_features(ds, all_row_indices(ds), model.target_name, include_cell_id);
  if (fm.feature_names != model.feature_names) {
    std::string expected, got;
    for (const auto& f : model.feature_names) expected += f + " ";
    for (const auto& f : fm.feature_names) got += f + " ";
    throw std::invalid_argument("model/dataset feature mismatch: model wants [" +
                                expected + "], dataset yields [" + got + "]");
  }
  if (fm.x.empty()) {
    throw std::invalid_argument("no complete rows to explain in " + a.dataset);
  }

  const BackgroundSet bg = BackgroundSet::from_rows(fm.x, background_cap, seed);
  const std::size_t n_rows =
      explain_cap == 0 ? fm.x.size() : std::min(explain_cap, fm.x.size());

  AttributionCounters counters;
  std::vector<Explanation> explanations;
  explanations.reserve(n_rows);
  double max_efficiency_dev = 0.0;
  for (std::size_t k = 0; k < n_rows; ++k) {
    Explanation ex = shapley_exact(model, fm.x[k], bg, &counters);
    const double total =
        std::accumulate(ex.phi.begin(), ex.phi.end(), ex.base_value);
    max_efficiency_dev = std::max(max_efficiency_dev, std::abs(total - ex.prediction));
    explanations.push_back(std::move(ex));
  }
  if (max_efficiency_dev > 1e-9) {
    throw std::runtime_error("efficiency axiom violated: max |base + sum(phi) - "
                             "prediction| = " +
                             format_double(max_efficiency_dev));
  }
  const GlobalImportance gi = global_importance(explanations);

  {
    CsvTable t;
    t.header = {"target", "record", "base_value", "prediction", "feature", "phi"};
    for (std::size_t k = 0; k < explanations.size(); ++k) {
      const Explanation& ex = explanations[k];
      for (std::size_t j = 0; j < ex.phi.size(); ++j) {
        t.rows.push_back({model.target_name, std::to_string(fm.row_indices[k]),
                          format_double(ex.base_value), format_double(ex.prediction),
                          ex.feature_names[j], format_double(ex.phi[j])});
      }
    }
    write_csv(out + "/explanations.csv", t);
  }
  {
    CsvTable t;
    t.header = {"feature", "mean_abs_phi", "rank"};
    int rank = 1;
    for (int j : gi.rank) {
      t.rows.push_back({gi.feature_names[static_cast<std::size_t>(j)],
                        format_double(gi.mean_abs_phi[static_cast<std::size_t>(j)]),
                        std::to_string(rank++)});
    }
    write_csv(out + "/importance.csv", t);
  }

  RunManifest m = start_manifest(g, "explain");
  m.set("target", model.target_name);
  m.set("model_kind", to_string(model.kind));
  m.set_int("seed", static_cast<long long>(seed));
  m.set_int("explained_rows", static_cast<long long>(n_rows));
  m.set_int("background_rows", static_cast<long long>(bg.rows.size()));
  m.set_int("coalition_evals", static_cast<long long>(counters.coalition_evals));
  m.set_double("max_efficiency_deviation", max_efficiency_dev);
  m.record_input("model", a.model);
  m.record_input("dataset", a.dataset);
  if (!config.empty()) m.record_input("config", config);
  m.record_output("explanations", out + "/explanations.csv");
  m.record_output("importance", out + "/importance.csv");
  m.save(out + "/manifest.txt");

  std::string top;
  for (std::size_t r = 0; r < gi.rank.size() && r < 3; ++r) {
    if (!top.empty()) top += ", ";
    top += gi.feature_names[static_cast<std::size_t>(gi.rank[r])];
  }
  note(g, "explained " + std::to_string(n_rows) + " rows for " + model.target_name +
              " (efficiency ok, max deviation " + format_double(max_efficiency_dev) +
              "); top features: " + top);
  return 0;
}

int cmd_run(const GlobalOptions& g, const RunArgs& a) {
  const std::string config = require_config(g);
  const std::string out = require_out(g);

  Dataset ds = load_dataset_csv(a.dataset);
  if (!a.sites.empty()) ds.topology = load_sites_csv(a.sites);

  PipelineConfig cfg = PipelineConfig::from_kv_file(config);
  if (g.seed_set) {
    cfg.seed = g.seed;
    cfg.fit.seed = g.seed;
  }

  const KvFile kv = KvFile::parse_file(config);
  const auto n_train = kv.get_int_or("n_train", 0);
  const auto n_test = kv.get_int_or("n_test", 0);
  if (n_train > 0 && n_test > 0) {
    train_test_split(ds, static_cast<int>(n_train), static_cast<int>(n_test),
                     cfg.seed);
  }

  const PipelineOutput result = run_pipeline(ds, cfg);

  RunManifest m = start_manifest(g, "run");
  m.record_input("dataset", a.dataset);
  m.record_input("config", config);
  if (!a.sites.empty()) m.record_input("sites", a.sites);
  m.set_int("n_train", n_train);
  m.set_int("n_test", n_test);
  save_pipeline_output(out, result, ds, cfg, &m);

  note(g, "associated " + std::to_string(result.associations.n_associated) + "/" +
              std::to_string(result.associations.users.size()) +
              " users; training loss " + format_double(result.training_loss) +
              "; objective " + format_double(result.objective) + " (truth " +
              format_double(result.objective_truth) + ") -> " + out);
  return 0;
}

int cmd_report(const GlobalOptions& g, const ReportArgs& a) {
  const std::string out = require_out(g);
  if (a.runs.empty()) {
    throw std::invalid_argument("report: at least one run directory is required");
  }

  std::vector<RunData> runs;
  runs.reserve(a.runs.size());
  for (const auto& dir : a.runs) runs.push_back(load_run_dir(dir));

  const std::string reference = a.reference.empty() ? "theoretical" : a.reference;
  const ComparisonReport report = build_comparison_report(runs, reference);
  render_report_files(out, report);

  RunManifest m = start_manifest(g, "report");
  m.set("reference", reference);
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    m.set("run." + std::to_string(i), runs[i].name);
    m.record_input("run." + std::to_string(i) + ".predictions",
                   a.runs[i] + "/predictions.csv");
  }
  m.record_output("comparison", out + "/comparison.csv");
  m.record_output("improvements", out + "/improvements.csv");
  m.record_output("importance", out + "/importance.csv");
  m.record_output("correlation", out + "/correlation.csv");
  m.record_output("summary", out + "/report.txt");
  m.save(out + "/manifest.txt");

  std::string lines;
  for (const auto& r : report.improvements) {
    lines += "  " + r.run_name + " " + r.target + ": " +
             format_double(r.actual_mean) + " vs " + format_double(r.reference_mean) +
             " -> " + format_double(r.rate_pct) + "%\n";
  }
  note(g, "report over " + std::to_string(runs.size()) + " runs (reference " +
              reference + ") -> " + out + "\n" + lines);
  return 0;
}

}  // namespace ioeq::cli
