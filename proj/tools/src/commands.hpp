#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ioeq::cli {

// Options shared by every subcommand. `seed_set` distinguishes an explicit
// --seed from the config-file default.
struct GlobalOptions {
  std::uint64_t seed = 1;
  bool seed_set = false;
  std::string config;
  std::string out;
  bool quiet = false;

  std::string command_line;  // reassembled argv for the manifest
};

// Resolves --config against IOEQ_CONFIG_DIR when the given name does not
// exist as written and contains no slash.
std::string resolve_config_path(const std::string& name);

struct GenerateArgs {};

struct IngestArgs {
  std::string input;
  std::string mapping;
};

struct TrainArgs {
  std::string dataset;
  std::string kind;
  std::string target;
};

struct ExplainArgs {
  std::string model;
  std::string dataset;
};

struct RunArgs {
  std::string dataset;
  std::string sites;
};

struct ReportArgs {
  std::vector<std::string> runs;
  std::string reference;
};

int cmd_generate(const GlobalOptions& g, const GenerateArgs& a);
int cmd_ingest(const GlobalOptions& g, const IngestArgs& a);
int cmd_train(const GlobalOptions& g, const TrainArgs& a);
int cmd_explain(const GlobalOptions& g, const ExplainArgs& a);
int cmd_run(const GlobalOptions& g, const RunArgs& a);
int cmd_report(const GlobalOptions& g, const ReportArgs& a);

}  // namespace ioeq::cli
