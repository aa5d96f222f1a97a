#include <exception>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "ioeq/kv.hpp"
#include "ioeq/version.hpp"

namespace {

// Exit contract: 0 success, 2 usage error, 3 validation error, 4 runtime error.
int run_guarded(const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const ioeq::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace ioeq::cli;

  CLI::App app{"quality-aware IoE service delivery toolkit"};
  app.set_version_flag("--version", ioeq::kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  for (int i = 0; i < argc; ++i) {
    if (i) g.command_line += ' ';
    g.command_line += argv[i];
  }
  app.add_option("--seed", g.seed, "override the config seed")
      ->each([&g](const std::string&) { g.seed_set = true; });
  app.add_option("--config", g.config,
                 "key-value config file; bare names resolve against $IOEQ_CONFIG_DIR");
  app.add_option("--out", g.out, "output directory");
  app.add_flag("--quiet", g.quiet, "suppress progress notes");

  GenerateArgs gen;
  app.add_subcommand("generate",
                     "synthesize a session dataset from a scenario config");

  IngestArgs ing;
  auto* ingest = app.add_subcommand("ingest", "map a raw delimited trace onto the "
                                              "canonical session schema");
  ingest->add_option("--input", ing.input, "raw delimited text file")->required();
  ingest->add_option("--mapping", ing.mapping, "column mapping file")->required();

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "fit one regression model on a dataset");
  train->add_option("--dataset", tr.dataset, "canonical dataset file")->required();
  train->add_option("--kind", tr.kind,
                    "linear | random_forest | extra_trees | gradient_boosting | "
                    "adaboost_r2");
  train->add_option("--target", tr.target, "prediction target column");

  ExplainArgs ex;
  auto* explain = app.add_subcommand("explain", "exact per-feature attributions "
                                                "for a trained model");
  explain->add_option("--model", ex.model, "model file from `train`")->required();
  explain->add_option("--dataset", ex.dataset, "canonical dataset file")->required();

  RunArgs run;
  auto* runc = app.add_subcommand("run", "full delivery pipeline: associate, fit, "
                                         "attribute, predict");
  runc->add_option("--dataset", run.dataset, "canonical dataset file")->required();
  runc->add_option("--sites", run.sites, "gNB topology file (for position-based "
                                         "association)");

  ReportArgs rep;
  auto* report = app.add_subcommand("report", "cross-run comparison tables and "
                                              "figures");
  report->add_option("--runs", rep.runs, "run output directories")
      ->required()
      ->expected(-1);
  report->add_option("--reference", rep.reference,
                     "reference run name, or `theoretical` for the ground-truth "
                     "baseline");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (app.got_subcommand("generate")) {
    return run_guarded([&] { return cmd_generate(g, gen); });
  }
  if (app.got_subcommand("ingest")) {
    return run_guarded([&] { return cmd_ingest(g, ing); });
  }
  if (app.got_subcommand("train")) {
    return run_guarded([&] { return cmd_train(g, tr); });
  }
  if (app.got_subcommand("explain")) {
    return run_guarded([&] { return cmd_explain(g, ex); });
  }
  if (app.got_subcommand("run")) {
    return run_guarded([&] { return cmd_run(g, run); });
  }
  if (app.got_subcommand("report")) {
    return run_guarded([&] { return cmd_report(g, rep); });
  }
  std::cerr << "error: no subcommand given\n";
  return 2;
}
