#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "compact_markov/chain.hpp"
#include "compact_markov/tightness.hpp"

namespace compact_markov {

/// Counter-based SplitMix64 stream: draw i is mix(seed + (i+1) * golden_gamma),
/// so any stream position is reproducible from (seed, counter) alone.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

  std::uint64_t next() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Independent stream for sub-task `index` (e.g. one trial).
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t index) noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

/// Inverse-CDF draw from a row in its entry order.
StateId sample_transition(const RowDistribution& row, double u);

/// A realisation Z_0 .. Z_steps.
struct Path {
  std::vector<StateId> states;
  std::uint64_t seed = 0;
  std::string chain;
};

Path simulate_path(const Kernel& k, StateId x0, std::size_t steps, std::uint64_t seed);

struct EstimateWithCI {
  double mean = 0.0;
  double half_width = 0.0;  // 95% normal interval
  std::size_t trials = 0;

  double std_error() const noexcept { return half_width / 1.959963984540054; }
};

struct ReturnTimeEstimate {
  EstimateWithCI estimate;  // over uncensored trials; a lower bound when censored_count > 0
  std::size_t censored_count = 0;
};

/// Samples T_x = inf{n >= 1 : Z_n = x} from Z_0 = x, censoring at `cap` steps.
ReturnTimeEstimate estimate_return_time(const Kernel& k, StateId x, std::size_t trials, std::size_t cap,
                                        std::uint64_t seed);

/// Fraction of i = 1..steps with Z_i in A; the interval uses batch means.
EstimateWithCI occupation_fraction(const Kernel& k, std::span<const StateId> set, StateId x0, std::size_t steps,
                                   std::uint64_t seed);

/// Running occupation fraction of A every `stride` steps, for plotting.
std::vector<std::pair<std::size_t, double>> occupation_trace(const Kernel& k, std::span<const StateId> set, StateId x0,
                                                             std::size_t steps, std::size_t stride, std::uint64_t seed);

struct SurvivalCurve {
  std::vector<double> survival;  // survival[n-1] = empirical P(T_A >= n), n = 1..cap
  std::size_t trials = 0;
  std::size_t censored_count = 0;  // trials with T_A > cap
  EstimateWithCI mean;             // mean of uncensored T_A
  /// Filled when a certificate was supplied: n where P^(T_A >= n) > eps^{n-1} + 3 sigma.
  std::optional<std::vector<std::size_t>> violations;
};

SurvivalCurve hitting_time_samples(const Kernel& k, std::span<const StateId> set, StateId x0, std::size_t trials,
                                   std::size_t cap, std::uint64_t seed,
                                   const std::optional<TightnessCertificate>& cert = std::nullopt);

}  // namespace compact_markov
