#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ioeq/csv.hpp"
#include "ioeq/dataset.hpp"
#include "ioeq/evaluation.hpp"
#include "ioeq/kv.hpp"
#include "ioeq/regressors.hpp"
#include "ioeq/shapley.hpp"
#include "support.hpp"

using namespace ioeq;
using testsupport::TempDir;
using testsupport::read_file;
using testsupport::write_file;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

// Runs the installed binary through the shell; stdout/stderr land in scratch
// files so assertions can inspect them.
CliResult run_cli(const TempDir& tmp, const std::string& args,
                  const std::string& env_prefix = "") {
  static int counter = 0;
  const std::string out_path = tmp.file("cli_out_" + std::to_string(counter));
  const std::string err_path = tmp.file("cli_err_" + std::to_string(counter));
  ++counter;
  const std::string cmd = env_prefix + "\"" + IOEQ_BIN_PATH + "\" " + args + " >" +
                          out_path + " 2>" + err_path;
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out_path);
  r.err = read_file(err_path);
  return r;
}

const char* kScenario =
    "sessions = 160\n"
    "seed = 7\n"
    "gnb_count = 2\n"
    "gnb_spacing_m = 300\n"
    "gnb_tx_power_dbm = 55\n"
    "gnb_coverage_radius_m = 250\n"
    "max_speed_kmh = 88\n"
    "path_loss_exp = 3.4\n"
    "shadowing_sigma_db = 3\n";

const char* kPipelineBase =
    "targets = cqi dl_mbps ul_mbps\n"
    "n_estimators = 20\n"
    "seed = 1\n"
    "n_train = 100\n"
    "n_test = 40\n"
    "omega_dbm = -110\n"
    "zeta_db = -12\n"
    "h_max_m = 1000\n"
    "delta_t_hours = 0.01\n"
    "background_cap = 50\n"
    "explain_cap = 3\n"
    "path_loss_exp = 3.4\n";

std::string pipeline_config(const std::string& kind) {
  return "model_kind = " + kind + "\n" + kPipelineBase;
}

// generate a small two-site dataset; returns the output directory
std::string generate_dataset(const TempDir& tmp) {
  write_file(tmp.file("scen.cfg"), kScenario);
  const std::string out = tmp.file("gen");
  const CliResult r =
      run_cli(tmp, "generate --config " + tmp.file("scen.cfg") + " --out " + out);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  return out;
}

std::vector<double> csv_column(const CsvTable& t, const std::string& name) {
  const int c = t.column(name);
  REQUIRE(c >= 0);
  std::vector<double> v;
  for (const auto& row : t.rows) v.push_back(parse_double(row[static_cast<std::size_t>(c)]));
  return v;
}

double mean_of_vec(const std::vector<double>& v) {
  double acc = 0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

// manifest lines that digest run outputs; created_unix and command_line vary
// between invocations and stay out of the comparison
std::vector<std::string> output_digest_lines(const std::string& manifest_path) {
  std::vector<std::string> lines;
  std::istringstream in(read_file(manifest_path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("output.", 0) == 0) lines.push_back(line);
  }
  return lines;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit 2") {
  TempDir tmp("cli_usage");
  CHECK(run_cli(tmp, "").code == 2);
  CHECK(run_cli(tmp, "frobnicate").code == 2);
  CHECK(run_cli(tmp, "--bogus generate").code == 2);
  CHECK(run_cli(tmp, "train --out " + tmp.file("o")).code == 2);  // missing --dataset
  CHECK(run_cli(tmp, "--help").code == 0);

  const CliResult version = run_cli(tmp, "--version");
  CHECK(version.code == 0);
  CHECK_FALSE(version.out.empty());
}

TEST_CASE("generate writes a deterministic dataset") {
  TempDir tmp("cli_gen");
  write_file(tmp.file("scen.cfg"), kScenario);

  const CliResult r1 = run_cli(
      tmp, "generate --config " + tmp.file("scen.cfg") + " --out " + tmp.file("g1"));
  REQUIRE_MESSAGE(r1.code == 0, r1.err);
  CHECK(r1.out.find("160 sessions") != std::string::npos);

  const Dataset ds = load_dataset_csv(tmp.file("g1") + "/dataset.csv");
  CHECK(ds.records.size() == 160);
  const std::vector<GnbSite> sites = load_sites_csv(tmp.file("g1") + "/sites.csv");
  CHECK(sites.size() == 2);
  CHECK(std::filesystem::exists(tmp.file("g1") + "/stats.csv"));

  SUBCASE("rerun is byte-identical") {
    const CliResult r2 = run_cli(
        tmp, "generate --config " + tmp.file("scen.cfg") + " --out " + tmp.file("g2"));
    REQUIRE(r2.code == 0);
    for (const char* f : {"dataset.csv", "sites.csv", "stats.csv"}) {
      CHECK(read_file(tmp.file("g1") + "/" + f) == read_file(tmp.file("g2") + "/" + f));
    }
    CHECK(output_digest_lines(tmp.file("g1") + "/manifest.txt") ==
          output_digest_lines(tmp.file("g2") + "/manifest.txt"));
  }
  SUBCASE("--seed override changes the data") {
    const CliResult r3 = run_cli(tmp, "generate --seed 8 --config " +
                                          tmp.file("scen.cfg") + " --out " +
                                          tmp.file("g3"));
    REQUIRE(r3.code == 0);
    CHECK(read_file(tmp.file("g1") + "/dataset.csv") !=
          read_file(tmp.file("g3") + "/dataset.csv"));
  }
  SUBCASE("--quiet silences the note") {
    const CliResult rq = run_cli(tmp, "generate --quiet --config " +
                                          tmp.file("scen.cfg") + " --out " +
                                          tmp.file("gq"));
    CHECK(rq.code == 0);
    CHECK(rq.out.empty());
    CHECK(rq.err.empty());
  }
}

TEST_CASE("config resolution and validation failures") {
  TempDir tmp("cli_cfg");

  SUBCASE("bare names resolve against IOEQ_CONFIG_DIR") {
    write_file(tmp.file("scen.cfg"), kScenario);
    const CliResult r =
        run_cli(tmp, "generate --config scen.cfg --out " + tmp.file("g"),
                "IOEQ_CONFIG_DIR=" + tmp.str() + " ");
    CHECK_MESSAGE(r.code == 0, r.err);
  }
  SUBCASE("missing config exits 3") {
    const CliResult r =
        run_cli(tmp, "generate --config nowhere.cfg --out " + tmp.file("g"));
    CHECK(r.code == 3);
    CHECK(r.err.find("config file not found") != std::string::npos);
  }
  SUBCASE("malformed config reports the offending line") {
    write_file(tmp.file("bad.cfg"), "# scenario\nTHIS IS NOT KEY VALUE\n");
    const CliResult r =
        run_cli(tmp, "generate --config " + tmp.file("bad.cfg") + " --out " +
                         tmp.file("g"));
    CHECK(r.code == 3);
    CHECK(r.err.find("line 2") != std::string::npos);
  }
  SUBCASE("missing --out exits 3") {
    write_file(tmp.file("scen.cfg"), kScenario);
    const CliResult r = run_cli(tmp, "generate --config " + tmp.file("scen.cfg"));
    CHECK(r.code == 3);
    CHECK(r.err.find("--out") != std::string::npos);
  }
}

TEST_CASE("ingest applies the mapping and flags sentinels") {
  TempDir tmp("cli_ingest");
  write_file(tmp.file("map.cfg"),
             "time = timestamp\n"
             "cellId = cell_id\n"
             "speed_mps = speed_kmh:3.6\n"
             "rssi = rssi_dbm\n"
             "rsrp = rsrp_dbm\n"
             "rsrq = rsrq_db\n"
             "snr = sinr_db\n"
             "CQI = cqi\n"
             "down_kbps = dl_mbps:0.001\n"
             "up_kbps = ul_mbps:0.001\n"
             "sentinel1 = NA\n");
  write_file(tmp.file("raw.csv"),
             "time,cellId,speed_mps,rssi,rsrq,rsrp,snr,CQI,down_kbps,up_kbps\n"
             "100,1,10,-70,-11,-95,12,10,5000,400\n"
             "101,1,20,-71,-11,-96,NA,11,6000,500\n"
             "102,2,garbage,-72,-11,-97,13,12,7000,600\n"
             "103,2,30,-73,-11,-98,14,13,8000,700\n");

  const CliResult r = run_cli(tmp, "ingest --input " + tmp.file("raw.csv") +
                                       " --mapping " + tmp.file("map.cfg") +
                                       " --out " + tmp.file("ing"));
  REQUIRE_MESSAGE(r.code == 0, r.err);

  const KvFile manifest = KvFile::parse_file(tmp.file("ing") + "/manifest.txt");
  CHECK(manifest.get_int("rows_read") == 4);
  CHECK(manifest.get_int("rows_kept") == 3);
  CHECK(manifest.get_int("rows_dropped") == 1);
  CHECK(manifest.get_int("rows_flagged") == 1);

  const Dataset ds = load_dataset_csv(tmp.file("ing") + "/dataset.csv");
  REQUIRE(ds.records.size() == 3);
  CHECK(ds.records[0].speed_kmh == 36.0);       // 10 m/s
  CHECK(ds.records[0].dl_mbps == 5.0);          // 5000 kbps
  CHECK(ds.records[0].ul_mbps == 0.4);
  CHECK(ds.records[2].timestamp == 103.0);      // garbage row dropped
  const unsigned sinr_bit =
      1u << static_cast<unsigned>(canonical_field_index("sinr_db"));
  CHECK((ds.records[1].missing_mask & sinr_bit) != 0);
  CHECK((ds.records[0].missing_mask & sinr_bit) == 0);
}

TEST_CASE("train fits a model file that reloads and repeats") {
  TempDir tmp("cli_train");
  const std::string gen = generate_dataset(tmp);
  write_file(tmp.file("train.cfg"), "n_estimators = 15\nseed = 9\n");

  const std::string args = "train --dataset " + gen + "/dataset.csv" +
                           " --kind extra_trees --target cqi --config " +
                           tmp.file("train.cfg") + " --out ";
  const CliResult r1 = run_cli(tmp, args + tmp.file("t1"));
  REQUIRE_MESSAGE(r1.code == 0, r1.err);

  const EnsembleModel model = load_model(tmp.file("t1") + "/model.txt");
  CHECK(model.kind == ModelKind::kExtraTrees);
  CHECK(model.target_name == "cqi");
  CHECK(model.trees.size() == 15);

  // the reloaded model reproduces the manifest's training loss
  const Dataset ds = load_dataset_csv(gen + "/dataset.csv");
  std::vector<int> rows(ds.records.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i);
  const FeatureMatrix fm = build_features(ds, rows, "cqi", true);
  const KvFile manifest = KvFile::parse_file(tmp.file("t1") + "/manifest.txt");
  const double reported = manifest.get_double("training_loss");
  CHECK(std::abs(training_loss(model.predict(fm.x), fm.y) - reported) <= 1e-12);

  SUBCASE("rerun writes identical bytes") {
    const CliResult r2 = run_cli(tmp, args + tmp.file("t2"));
    REQUIRE(r2.code == 0);
    CHECK(read_file(tmp.file("t1") + "/model.txt") ==
          read_file(tmp.file("t2") + "/model.txt"));
  }
  SUBCASE("invalid hyperparameters exit 3") {
    write_file(tmp.file("bad.cfg"), "n_estimators = 0\n");
    const CliResult r = run_cli(tmp, "train --dataset " + gen + "/dataset.csv" +
                                         " --kind extra_trees --config " +
                                         tmp.file("bad.cfg") + " --out " +
                                         tmp.file("tb"));
    CHECK(r.code == 3);
    CHECK(r.err.find("n_estimators") != std::string::npos);
  }
  SUBCASE("unknown model kind exits 3") {
    const CliResult r = run_cli(tmp, "train --dataset " + gen + "/dataset.csv" +
                                         " --kind cubist --out " + tmp.file("tk"));
    CHECK(r.code == 3);
  }
}

TEST_CASE("explain recovers the linear attribution identity") {
  TempDir tmp("cli_explain");
  const std::string gen = generate_dataset(tmp);
  write_file(tmp.file("lin.cfg"), "seed = 9\n");
  const CliResult tr = run_cli(tmp, "train --dataset " + gen + "/dataset.csv" +
                                        " --kind linear --target cqi --config " +
                                        tmp.file("lin.cfg") + " --out " +
                                        tmp.file("m"));
  REQUIRE_MESSAGE(tr.code == 0, tr.err);

  write_file(tmp.file("exp.cfg"),
             "background_cap = 50\nexplain_cap = 4\nseed = 9\n");
  const CliResult ex = run_cli(tmp, "explain --model " + tmp.file("m") +
                                        "/model.txt --dataset " + gen +
                                        "/dataset.csv --config " + tmp.file("exp.cfg") +
                                        " --out " + tmp.file("e"));
  REQUIRE_MESSAGE(ex.code == 0, ex.err);

  // oracle: for a linear model, phi_j = coef_j * (x_j - background mean_j)
  const EnsembleModel model = load_model(tmp.file("m") + "/model.txt");
  const Dataset ds = load_dataset_csv(gen + "/dataset.csv");
  std::vector<int> rows(ds.records.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i);
  const FeatureMatrix fm = build_features(ds, rows, "cqi", false);
  REQUIRE(fm.feature_names == model.feature_names);
  const BackgroundSet bg = BackgroundSet::from_rows(fm.x, 50, 9);

  const CsvTable t = read_csv(tmp.file("e") + "/explanations.csv");
  const int c_record = t.column("record");
  const int c_feature = t.column("feature");
  const int c_phi = t.column("phi");
  const int c_base = t.column("base_value");
  REQUIRE(c_record >= 0);
  REQUIRE(t.rows.size() == 4 * model.feature_names.size());

  std::map<std::string, std::size_t> feature_pos;
  for (std::size_t j = 0; j < model.feature_names.size(); ++j) {
    feature_pos[model.feature_names[j]] = j;
  }
  for (const auto& row : t.rows) {
    const auto rec = static_cast<std::size_t>(
        parse_double(row[static_cast<std::size_t>(c_record)]));
    const std::size_t j = feature_pos.at(row[static_cast<std::size_t>(c_feature)]);
    const double expected = model.coefficients[j] * (fm.x[rec][j] - bg.means[j]);
    CHECK(std::abs(parse_double(row[static_cast<std::size_t>(c_phi)]) - expected) <=
          1e-9);
    CHECK(std::abs(parse_double(row[static_cast<std::size_t>(c_base)]) -
                   model.predict_one(bg.means)) <= 1e-9);
  }
  CHECK(std::filesystem::exists(tmp.file("e") + "/importance.csv"));
}

TEST_CASE("explain rejects a model whose features the dataset cannot supply") {
  TempDir tmp("cli_mismatch");
  const std::string gen = generate_dataset(tmp);

  const std::vector<std::vector<double>> x = {{0, 1}, {1, 0}, {2, 2}, {3, 1}};
  const std::vector<double> y = {1, 2, 3, 4};
  FitConfig fit;
  fit.n_estimators = 1;
  const EnsembleModel toy =
      fit_ensemble(x, y, ModelKind::kLinear, fit, {"alpha", "beta"}, "cqi");
  save_model(tmp.file("toy.txt"), toy);

  const CliResult r = run_cli(tmp, "explain --model " + tmp.file("toy.txt") +
                                       " --dataset " + gen + "/dataset.csv --out " +
                                       tmp.file("e"));
  CHECK(r.code == 3);
  CHECK(r.err.find("feature mismatch") != std::string::npos);
}

TEST_CASE("run emits the full artifact set deterministically") {
  TempDir tmp("cli_run");
  const std::string gen = generate_dataset(tmp);
  write_file(tmp.file("pipe.cfg"), pipeline_config("extra_trees"));

  const std::string args = "run --dataset " + gen + "/dataset.csv --sites " + gen +
                           "/sites.csv --config " + tmp.file("pipe.cfg") + " --out ";
  const CliResult r1 = run_cli(tmp, args + tmp.file("r1"));
  REQUIRE_MESSAGE(r1.code == 0, r1.err);
  CHECK(r1.out.find("associated") != std::string::npos);

  const std::vector<std::string> artifacts = {
      "associations.csv", "predictions.csv", "coefficients.csv",
      "explanations.csv", "metrics.csv",     "manifest.txt"};
  for (const auto& f : artifacts) {
    CAPTURE(f);
    CHECK(std::filesystem::exists(tmp.file("r1") + "/" + f));
  }

  const CliResult r2 = run_cli(tmp, args + tmp.file("r2"));
  REQUIRE(r2.code == 0);
  for (const auto& f : artifacts) {
    if (f == "manifest.txt") continue;  // carries the wall clock
    CAPTURE(f);
    CHECK(read_file(tmp.file("r1") + "/" + f) == read_file(tmp.file("r2") + "/" + f));
  }
  const auto d1 = output_digest_lines(tmp.file("r1") + "/manifest.txt");
  CHECK_FALSE(d1.empty());
  CHECK(d1 == output_digest_lines(tmp.file("r2") + "/manifest.txt"));
}

TEST_CASE("run without a split in the config exits 4") {
  TempDir tmp("cli_nosplit");
  const std::string gen = generate_dataset(tmp);
  write_file(tmp.file("pipe.cfg"),
             "model_kind = linear\nn_estimators = 5\npath_loss_exp = 3.4\n");
  const CliResult r = run_cli(tmp, "run --dataset " + gen + "/dataset.csv --sites " +
                                       gen + "/sites.csv --config " +
                                       tmp.file("pipe.cfg") + " --out " +
                                       tmp.file("r"));
  CHECK(r.code == 4);
  CHECK(r.err.find("train_test_split") != std::string::npos);
}

TEST_CASE("report compares runs against the ground-truth reference") {
  TempDir tmp("cli_report");
  const std::string gen = generate_dataset(tmp);
  write_file(tmp.file("pipe_et.cfg"), pipeline_config("extra_trees"));
  write_file(tmp.file("pipe_lin.cfg"), pipeline_config("linear"));

  REQUIRE(run_cli(tmp, "run --dataset " + gen + "/dataset.csv --sites " + gen +
                           "/sites.csv --config " + tmp.file("pipe_et.cfg") +
                           " --out " + tmp.file("run_et"))
              .code == 0);
  REQUIRE(run_cli(tmp, "run --dataset " + gen + "/dataset.csv --sites " + gen +
                           "/sites.csv --config " + tmp.file("pipe_lin.cfg") +
                           " --out " + tmp.file("run_lin"))
              .code == 0);

  const CliResult rep = run_cli(
      tmp, "report --runs " + tmp.file("run_et") + " " + tmp.file("run_lin") +
               " --reference theoretical --out " + tmp.file("rep"));
  REQUIRE_MESSAGE(rep.code == 0, rep.err);

  for (const char* f : {"comparison.csv", "improvements.csv", "importance.csv",
                        "correlation.csv", "report.txt", "cqi_box.svg",
                        "score_bars.svg", "mape_bars.svg", "rate_bars.svg",
                        "importance_bars.svg", "correlation_heat.svg"}) {
    CAPTURE(f);
    CHECK(std::filesystem::exists(tmp.file("rep") + "/" + std::string(f)));
  }

  // improvement rows must match rates recomputed from the run artifacts
  const CsvTable pred_et = read_csv(tmp.file("run_et") + "/predictions.csv");
  const CsvTable imp = read_csv(tmp.file("rep") + "/improvements.csv");
  const int c_run = imp.column("run");
  const int c_target = imp.column("target");
  const int c_actual = imp.column("actual_mean");
  const int c_ref = imp.column("reference_mean");
  const int c_rate = imp.column("improvement_pct");
  REQUIRE(c_rate >= 0);
  CHECK(imp.rows.size() == 6);  // 2 runs x 3 targets
  for (const auto& row : imp.rows) {
    const double actual = parse_double(row[static_cast<std::size_t>(c_actual)]);
    const double ref = parse_double(row[static_cast<std::size_t>(c_ref)]);
    const double rate = parse_double(row[static_cast<std::size_t>(c_rate)]);
    CHECK(std::abs(improvement_rate(actual, ref) - rate) <= 1e-9);
    // theoretical reference: the truth means of the first run's test rows
    const std::string target = row[static_cast<std::size_t>(c_target)];
    CHECK(std::abs(mean_of_vec(csv_column(pred_et, target + "_true")) - ref) <= 1e-12);
    if (row[static_cast<std::size_t>(c_run)] == "run_et" && target == "cqi") {
      CHECK(std::abs(mean_of_vec(csv_column(pred_et, "cqi_pred")) - actual) <= 1e-12);
    }
  }

  SUBCASE("a run referenced against itself reports zero improvement") {
    const CliResult self = run_cli(
        tmp, "report --runs " + tmp.file("run_et") + " --reference run_et --out " +
                 tmp.file("rep_self"));
    REQUIRE_MESSAGE(self.code == 0, self.err);
    const CsvTable t = read_csv(tmp.file("rep_self") + "/improvements.csv");
    const int c = t.column("improvement_pct");
    for (const auto& row : t.rows) {
      CHECK(parse_double(row[static_cast<std::size_t>(c)]) == 0.0);
    }
  }
  SUBCASE("report reruns byte-identically") {
    const CliResult again = run_cli(
        tmp, "report --runs " + tmp.file("run_et") + " " + tmp.file("run_lin") +
                 " --reference theoretical --out " + tmp.file("rep2"));
    REQUIRE(again.code == 0);
    for (const char* f : {"comparison.csv", "improvements.csv", "report.txt",
                          "cqi_box.svg", "correlation_heat.svg"}) {
      CHECK(read_file(tmp.file("rep") + "/" + std::string(f)) ==
            read_file(tmp.file("rep2") + "/" + std::string(f)));
    }
  }
}

}  // TEST_SUITE
