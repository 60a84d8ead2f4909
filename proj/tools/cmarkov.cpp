// cmarkov: classification, tightness and bound checks for countable Markov chains.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "compact_markov/run.hpp"

namespace fs = std::filesystem;
using compact_markov::RunConfig;
using nlohmann::json;

namespace {

json read_json_file(const std::string& path, const char* field) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(std::string(field) + ": cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string(field) + ": " + e.what());
  }
}

void write_outputs(const compact_markov::RunResult& result, const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::ofstream(fs::path(out_dir) / "report.json") << result.report.dump(2) << '\n';
  for (const auto& [name, contents] : result.csv) std::ofstream(fs::path(out_dir) / name) << contents;
  std::ofstream(fs::path(out_dir) / "summary.txt") << result.summary;
}

struct Flags {
  std::string chain_path;
  std::string out_dir = "cmarkov-out";
  std::string report_path;
  RunConfig config;
  std::size_t target = 0;
  double epsilon = 0.0;
  std::vector<std::size_t> set;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--chain", f.chain_path, "Chain spec JSON file")->required();
  cmd->add_option("--out", f.out_dir, "Output directory for report.json and CSV files");
  cmd->add_option("--state", f.config.state, "State index x");
  cmd->add_option("--max-states", f.config.max_states, "Support cap for truncated distributions");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recurrence, tightness and return-time bounds for countable Markov chains"};
  app.require_subcommand(1);
  Flags f;

  auto* classify = app.add_subcommand("classify", "Transient / null / positive recurrence verdict for a state");
  add_common(classify, f);
  classify->add_option("--order", f.config.order, "Series order N");

  auto* tightness = app.add_subcommand("tightness", "Tail sup for a set, tight-set search and compactness verdict");
  add_common(tightness, f);
  tightness->add_option("--epsilon", f.epsilon, "Tightness level in (0,1)");
  tightness->add_option("--set", f.set, "Comma-separated state indices of A")->delimiter(',');
  tightness->add_option("--budget", f.config.budget, "State exploration budget");
  tightness->add_option("--nmax", f.config.nmax, "Largest n for the n-step tail check");

  auto* bounds = app.add_subcommand("bounds", "Return-time, hitting-time and reversible lower bounds");
  add_common(bounds, f);
  bounds->add_option("--epsilon", f.epsilon, "Tightness level in (0,1)")->required();
  bounds->add_option("--set", f.set, "Comma-separated state indices of A")->delimiter(',')->required();
  bounds->add_option("--order", f.config.order, "Series order N");
  bounds->add_option("--budget", f.config.budget, "State exploration budget");
  bounds->add_option("--nmax", f.config.nmax, "Largest n checked");
  bounds->add_option("--z", f.config.z, "Argument of the Green function bound, in [0,1)");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo return times, occupation and hitting times");
  add_common(simulate, f);
  simulate->add_option("--set", f.set, "Comma-separated state indices of A (default: the start state)")
      ->delimiter(',');
  simulate->add_option("--epsilon", f.epsilon, "Compare the survival curve with eps^(n-1) if A is certified");
  simulate->add_option("--trials", f.config.trials, "Independent trials");
  simulate->add_option("--steps", f.config.steps, "Path length for the occupation fraction");
  simulate->add_option("--cap", f.config.cap, "Censoring cap per trial");
  simulate->add_option("--seed", f.config.seed, "Base seed");
  simulate->add_option("--budget", f.config.budget, "State exploration budget");

  auto* series = app.add_subcommand("series", "First-passage and n-step coefficients as CSV");
  add_common(series, f);
  series->add_option("--target", f.target, "Target state y (default: the start state)");
  series->add_option("--order", f.config.order, "Series order N");

  auto* replay = app.add_subcommand("replay", "Re-run the configuration embedded in a report");
  replay->add_option("--report", f.report_path, "report.json written by an earlier run")->required();
  replay->add_option("--out", f.out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : compact_markov::kExitInvalidInput;
  }

  RunConfig config = f.config;
  try {
    if (replay->parsed()) {
      const json report = read_json_file(f.report_path, "report");
      if (!report.contains("config")) throw std::runtime_error("report: no embedded config");
      config = compact_markov::run_config_from_json(report.at("config"));
    } else {
      config.subcommand = app.get_subcommands().front()->get_name();
      config.chain = read_json_file(f.chain_path, "chain");
      config.set = f.set;
      const CLI::Option* eps = app.get_subcommands().front()->get_option_no_throw("--epsilon");
      if (eps != nullptr && eps->count() > 0) config.epsilon = f.epsilon;
      if (series->parsed() && series->count("--target") > 0) config.target = f.target;
    }
  } catch (const std::exception& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return compact_markov::kExitInvalidInput;
  }

  const compact_markov::RunResult result = compact_markov::run(config);
  try {
    write_outputs(result, f.out_dir);
  } catch (const std::exception& e) {
    std::cerr << "out: cannot write outputs: " << e.what() << '\n';
    return compact_markov::kExitInvalidInput;
  }
  (result.exit_code == compact_markov::kExitInvalidInput ? std::cerr : std::cout) << result.summary;
  return result.exit_code;
}
