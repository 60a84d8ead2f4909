#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace compact_markov {

inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitInvalidInput = 2;

/// Everything needed to reproduce one CLI invocation. The chain spec is kept
/// inline so a report can be replayed without the original file.
struct RunConfig {
  std::string subcommand;  // classify | tightness | bounds | simulate | series
  nlohmann::json chain;
  std::size_t state = 0;
  std::optional<std::size_t> target;
  std::size_t order = 512;
  std::optional<double> epsilon;
  std::size_t budget = 10'000;
  std::uint64_t seed = 1;
  std::size_t nmax = 50;
  double z = 0.5;
  std::size_t trials = 10'000;
  std::size_t steps = 100'000;
  std::size_t cap = 10'000;
  std::vector<std::size_t> set;
  std::size_t max_states = 10'000;
};

nlohmann::json to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& doc);

struct RunResult {
  int exit_code = kExitOk;
  nlohmann::json report;
  std::map<std::string, std::string> csv;  // file name -> contents
  std::string summary;
};

/// Runs one analysis. Invalid input yields exit code 2 with the offending
/// field in report["error"]; a violated guaranteed bound yields exit code 1.
RunResult run(const RunConfig& config);

}  // namespace compact_markov
