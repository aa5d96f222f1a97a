#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "ioeq/csv.hpp"
#include "ioeq/dataset.hpp"
#include "ioeq/pipeline.hpp"
#include "support.hpp"

using namespace ioeq;
using testsupport::TempDir;

namespace {

PipelineConfig base_config() {
  PipelineConfig cfg;
  cfg.kind = ModelKind::kLinear;
  cfg.fit.n_estimators = 10;
  cfg.explain_cap = 2;
  cfg.seed = 1;
  cfg.fit.seed = 1;
  return cfg;
}

// 12 feasible users at the same spot served by one site; every target is an
// exact affine function of speed, so a linear model must fit it perfectly.
Dataset exact_fit_dataset() {
  Dataset ds;
  ds.feature_names = canonical_columns();
  GnbSite site;
  site.cell_id = 1;
  site.pos_x = 0.0;
  site.pos_y = 0.0;
  site.tx_power_dbm = 40.0;
  site.coverage_radius_m = 500.0;
  ds.topology = {site};

  for (int i = 1; i <= 12; ++i) {
    SessionRecord r;
    r.timestamp = 1000.0 + i;
    r.cell_id = 1;
    r.speed_kmh = static_cast<double>(i);
    r.rssi_dbm = -70.0;
    r.rsrp_dbm = -100.0;
    r.rsrq_db = -11.0;
    r.sinr_db = 1.0;
    r.cqi = i;                       // target: speed itself
    r.dl_mbps = 2.0 * i + 3.0;       // target: affine in speed
    r.ul_mbps = 0.5 * i + 1.0;       // target: affine in speed
    r.pos_x = 10.0;
    r.pos_y = 0.0;
    ds.records.push_back(r);
  }
  return ds;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("mobility constraint hand values") {
  CHECK(check_mobility_constraint(60.0, 0.01, 1000.0, MobilityMode::kCoverage));
  CHECK_FALSE(check_mobility_constraint(60.0, 0.02, 1000.0, MobilityMode::kCoverage));
  CHECK(check_mobility_constraint(0.0, 0.5, 1.0, MobilityMode::kCoverage));

  // literal mode keeps the inequality as typeset: displacement >= h_max
  CHECK_FALSE(check_mobility_constraint(60.0, 0.01, 1000.0, MobilityMode::kLiteral));
  CHECK(check_mobility_constraint(60.0, 0.02, 1000.0, MobilityMode::kLiteral));
}

TEST_CASE("mobility mode string round-trip") {
  CHECK(mobility_mode_from_string("coverage") == MobilityMode::kCoverage);
  CHECK(mobility_mode_from_string("literal") == MobilityMode::kLiteral);
  CHECK(to_string(MobilityMode::kCoverage) == "coverage");
  CHECK_THROWS_AS(mobility_mode_from_string("sideways"), std::invalid_argument);
}

TEST_CASE("association grants only when every constraint is slack") {
  PipelineConfig cfg = base_config();

  SUBCASE("all constraints slack") {
    const UserAssociation ua =
        associate_one({{4, cfg.omega_dbm + 5.0, cfg.zeta_db + 5.0}}, 30.0, cfg);
    CHECK(ua.associated());
    CHECK(ua.cell_id == 4);
    CHECK(ua.rsrp_ok);
    CHECK(ua.rsrq_ok);
    CHECK(ua.mobility_ok);
  }
  SUBCASE("rsrp one below the floor") {
    const UserAssociation ua =
        associate_one({{4, cfg.omega_dbm - 1.0, cfg.zeta_db + 5.0}}, 30.0, cfg);
    CHECK_FALSE(ua.associated());
    CHECK_FALSE(ua.rsrp_ok);
    CHECK(ua.rsrq_ok);
  }
  SUBCASE("rsrp exactly at the floor passes") {
    const UserAssociation ua =
        associate_one({{4, cfg.omega_dbm, cfg.zeta_db}}, 30.0, cfg);
    CHECK(ua.associated());
  }
  SUBCASE("rsrq below the floor") {
    const UserAssociation ua =
        associate_one({{4, cfg.omega_dbm + 5.0, cfg.zeta_db - 0.5}}, 30.0, cfg);
    CHECK_FALSE(ua.associated());
    CHECK_FALSE(ua.rsrq_ok);
  }
  SUBCASE("mobility violation") {
    const UserAssociation ua =
        associate_one({{4, cfg.omega_dbm + 5.0, cfg.zeta_db + 5.0}}, 200.0, cfg);
    CHECK_FALSE(ua.associated());
    CHECK_FALSE(ua.mobility_ok);
    CHECK(ua.rsrp_ok);
  }
}

TEST_CASE("candidate selection is argmax rsrp with lowest-id ties") {
  PipelineConfig cfg = base_config();
  const UserAssociation best = associate_one(
      {{2, -95.0, -10.0}, {7, -90.0, -10.0}}, 10.0, cfg);
  CHECK(best.cell_id == 7);
  CHECK(best.rsrp_dbm == -90.0);

  const UserAssociation tie = associate_one(
      {{9, -90.0, -10.0}, {3, -90.0, -10.0}}, 10.0, cfg);
  CHECK(tie.cell_id == 3);
}

TEST_CASE("association from positions recomputes per-site signals") {
  PipelineConfig cfg = base_config();
  cfg.path_loss_exp = 3.0;

  GnbSite near;
  near.cell_id = 1;
  near.pos_x = 0.0;
  near.pos_y = 0.0;
  near.tx_power_dbm = 46.0;
  GnbSite far = near;
  far.cell_id = 2;
  far.pos_x = 3000.0;

  Dataset ds;
  SessionRecord user;
  user.timestamp = 1;
  user.cell_id = 2;  // recorded serving cell is overridden by geometry
  user.speed_kmh = 10.0;
  user.pos_x = 50.0;
  user.pos_y = 0.0;
  ds.records = {user};

  const AssociationDecision d = associate_users(ds, {near, far}, cfg);
  REQUIRE(d.users.size() == 1);
  CHECK(d.users[0].associated());
  CHECK(d.users[0].cell_id == 1);
  CHECK(d.n_associated == 1);

  // independent recheck of the granted thresholds
  CHECK(d.users[0].rsrp_dbm >= cfg.omega_dbm);
  CHECK(d.users[0].rsrq_db >= cfg.zeta_db);
}

TEST_CASE("association falls back to recorded signals without positions") {
  PipelineConfig cfg = base_config();
  Dataset ds;
  SessionRecord rec;
  rec.timestamp = 1;
  rec.cell_id = 5;
  rec.speed_kmh = 10.0;
  rec.rsrp_dbm = cfg.omega_dbm + 3.0;
  rec.rsrq_db = cfg.zeta_db + 3.0;
  ds.records = {rec};

  const AssociationDecision d = associate_users(ds, {}, cfg);
  CHECK(d.users[0].associated());
  CHECK(d.users[0].cell_id == 5);

  SUBCASE("missing recorded signal is an error") {
    ds.records[0].missing_mask |=
        1u << static_cast<unsigned>(canonical_field_index("rsrp_dbm"));
    CHECK_THROWS_WITH_AS(associate_users(ds, {}, cfg),
                         doctest::Contains("neither a position nor recorded"),
                         std::invalid_argument);
  }
}

TEST_CASE("position-bearing records require a topology") {
  PipelineConfig cfg = base_config();
  Dataset ds = exact_fit_dataset();
  CHECK_THROWS_WITH_AS(associate_users(ds, {}, cfg),
                       doctest::Contains("no gNB topology"),
                       std::invalid_argument);
}

TEST_CASE("every granted association satisfies the configured constraints") {
  ScenarioConfig sc;
  sc.sites = place_sites_grid(4, 300.0, 55.0, 250.0);
  sc.sessions = 150;
  sc.path_loss_exp = 3.4;
  sc.shadowing_sigma_db = 3.0;
  sc.seed = 33;
  const Dataset ds = synth_generate(sc);
  PipelineConfig cfg = base_config();
  cfg.path_loss_exp = sc.path_loss_exp;

  const AssociationDecision d = associate_users(ds, ds.topology, cfg);
  int granted = 0;
  for (const auto& ua : d.users) {
    if (!ua.associated()) continue;
    ++granted;
    CHECK(ua.rsrp_ok);
    CHECK(ua.rsrq_ok);
    CHECK(ua.mobility_ok);
    CHECK(ua.rsrp_dbm >= cfg.omega_dbm);
    CHECK(ua.rsrq_db >= cfg.zeta_db);
    const double disp =
        ds.records[static_cast<std::size_t>(ua.record_index)].speed_kmh *
        cfg.delta_t_hours * 1000.0;
    CHECK(disp <= cfg.h_max_m);
  }
  CHECK(granted == d.n_associated);
  CHECK(granted > 0);
}

TEST_CASE("degenerate run reaches an exact fit and a truth-equal objective") {
  Dataset ds = exact_fit_dataset();
  train_test_split(ds, 8, 4, 3);
  PipelineConfig cfg = base_config();

  const PipelineOutput out = run_pipeline(ds, cfg);
  CHECK(out.associations.n_associated == 12);
  CHECK(out.training_loss <= 1e-9);

  for (const auto& t : out.targets) {
    REQUIRE(t.predictions.size() == 4);
    for (std::size_t k = 0; k < t.predictions.size(); ++k) {
      CHECK(std::abs(t.predictions[k] - t.truths[k]) < 1e-6);
    }
    // reported cohort loss must match an independent recomputation
    CHECK(std::abs(t.train_loss -
                   training_loss(t.train_predictions, t.train_truths)) <= 1e-12);
  }
  CHECK(std::abs(out.objective - out.objective_truth) < 1e-6);
  CHECK(objective_value(out) == out.objective);
}

TEST_CASE("coalition counter is exactly 2^features per explained instance") {
  Dataset ds = exact_fit_dataset();
  train_test_split(ds, 8, 4, 3);

  SUBCASE("linear kind explains 7 features") {
    PipelineConfig cfg = base_config();
    cfg.explain_cap = 2;
    const PipelineOutput out = run_pipeline(ds, cfg);
    CHECK(out.counters.explained_instances == 3 * 2);  // per target
    CHECK(out.counters.coalition_evals == out.counters.explained_instances * 128);
  }
  SUBCASE("tree kinds explain 8 features") {
    PipelineConfig cfg = base_config();
    cfg.kind = ModelKind::kExtraTrees;
    cfg.fit.n_estimators = 5;
    cfg.explain_cap = 3;
    const PipelineOutput out = run_pipeline(ds, cfg);
    CHECK(out.counters.explained_instances == 3 * 3);
    CHECK(out.counters.coalition_evals == out.counters.explained_instances * 256);
  }
}

TEST_CASE("reruns are bit-identical") {
  Dataset ds = exact_fit_dataset();
  train_test_split(ds, 8, 4, 3);
  PipelineConfig cfg = base_config();
  cfg.kind = ModelKind::kRandomForest;
  cfg.fit.n_estimators = 7;

  const PipelineOutput a = run_pipeline(ds, cfg);
  const PipelineOutput b = run_pipeline(ds, cfg);
  CHECK(a.objective == b.objective);
  CHECK(a.training_loss == b.training_loss);
  REQUIRE(a.targets.size() == b.targets.size());
  for (std::size_t t = 0; t < a.targets.size(); ++t) {
    CHECK(a.targets[t].predictions == b.targets[t].predictions);
    CHECK(a.targets[t].train_predictions == b.targets[t].train_predictions);
    for (std::size_t e = 0; e < a.targets[t].explanations.size(); ++e) {
      CHECK(a.targets[t].explanations[e].phi == b.targets[t].explanations[e].phi);
    }
  }
}

TEST_CASE("pipeline refuses datasets without a split") {
  const Dataset ds = exact_fit_dataset();
  PipelineConfig cfg = base_config();
  CHECK_THROWS_WITH_AS(run_pipeline(ds, cfg), doctest::Contains("train_test_split"),
                       std::runtime_error);
}

TEST_CASE("pipeline reports an empty cohort when nothing associates") {
  Dataset ds = exact_fit_dataset();
  train_test_split(ds, 8, 4, 3);
  PipelineConfig cfg = base_config();
  cfg.omega_dbm = 50.0;  // unreachable floor
  CHECK_THROWS_WITH_AS(run_pipeline(ds, cfg), doctest::Contains("empty fitting cohort"),
                       std::runtime_error);
}

TEST_CASE("predicted rates are clamped non-negative") {
  Dataset ds = exact_fit_dataset();
  // steep negative relation drives linear extrapolation below zero
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    ds.records[i].ul_mbps = std::max(0.0, 3.0 - 0.5 * static_cast<double>(i));
  }
  train_test_split(ds, 8, 4, 3);
  PipelineConfig cfg = base_config();
  const PipelineOutput out = run_pipeline(ds, cfg);
  for (const auto& t : out.targets) {
    for (double p : t.predictions) CHECK(p >= 0.0);
  }
}

TEST_CASE("objective sums predicted cqi over associated test users") {
  PipelineOutput out;
  out.associations.users.resize(3);
  out.associations.users[0].cell_id = 1;
  out.associations.users[1].cell_id = -1;  // unassociated
  out.associations.users[2].cell_id = 2;
  TargetResult cqi;
  cqi.target = "cqi";
  cqi.test_rows = {0, 1, 2};
  cqi.predictions = {10.0, 99.0, 12.0};
  out.targets.push_back(cqi);
  CHECK(objective_value(out) == 22.0);

  PipelineOutput empty;
  CHECK(objective_value(empty) == 0.0);
}

TEST_CASE("pipeline config parses kv text") {
  const PipelineConfig cfg = PipelineConfig::from_kv_text(
      "omega_dbm = -108\nzeta_db = -13\nh_max_m = 900\ndelta_t_hours = 0.02\n"
      "mobility_mode = literal\nmodel_kind = gradient_boosting\n"
      "targets = cqi, dl_mbps\nn_estimators = 17\nlearning_rate = 0.2\n"
      "background_cap = 50\nexplain_cap = 9\nseed = 12\nrsrq_mode = literal_db\n");
  CHECK(cfg.omega_dbm == -108.0);
  CHECK(cfg.zeta_db == -13.0);
  CHECK(cfg.h_max_m == 900.0);
  CHECK(cfg.mobility_mode == MobilityMode::kLiteral);
  CHECK(cfg.kind == ModelKind::kGradientBoosting);
  CHECK(cfg.targets == std::vector<std::string>{"cqi", "dl_mbps"});
  CHECK(cfg.fit.n_estimators == 17);
  CHECK(cfg.fit.learning_rate == 0.2);
  CHECK(cfg.background_cap == 50);
  CHECK(cfg.explain_cap == 9);
  CHECK(cfg.seed == 12);
  CHECK(cfg.fit.seed == 12);
  CHECK(cfg.rsrq_mode == RsrqMode::kLiteralDb);
}

TEST_CASE("pipeline config validation rejects bad values") {
  PipelineConfig cfg = base_config();
  SUBCASE("h_max") {
    cfg.h_max_m = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
  SUBCASE("delta_t") {
    cfg.delta_t_hours = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
  SUBCASE("unknown target") {
    cfg.targets = {"cqi", "nonsense"};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
  SUBCASE("duplicate target") {
    cfg.targets = {"cqi", "cqi"};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
  SUBCASE("no targets") {
    cfg.targets.clear();
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
}

TEST_CASE("saved artifacts cover associations, predictions, attribution, metrics") {
  TempDir tmp("pipe_save");
  Dataset ds = exact_fit_dataset();
  train_test_split(ds, 8, 4, 3);
  PipelineConfig cfg = base_config();
  const PipelineOutput out = run_pipeline(ds, cfg);
  save_pipeline_output(tmp.str(), out, ds, cfg);

  for (const char* name : {"associations.csv", "predictions.csv", "coefficients.csv",
                           "explanations.csv", "metrics.csv", "manifest.txt"}) {
    CHECK(std::filesystem::exists(tmp.file(name)));
  }

  const CsvTable pred = read_csv(tmp.file("predictions.csv"));
  CHECK(pred.rows.size() == 4);
  CHECK(pred.column("cqi_true") >= 0);
  CHECK(pred.column("cqi_pred") >= 0);
  CHECK(pred.column("ul_mbps_pred") >= 0);

  const CsvTable assoc = read_csv(tmp.file("associations.csv"));
  CHECK(assoc.rows.size() == 12);
  CHECK(assoc.column("z") >= 0);

  const CsvTable coef = read_csv(tmp.file("coefficients.csv"));
  CHECK(coef.column("mean_abs_phi") >= 0);
  // every model feature appears for every target: 3 targets x 7 features
  CHECK(coef.rows.size() == 21);
}

}  // TEST_SUITE
