#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "compact_markov/chain.hpp"
#include "compact_markov/passage.hpp"
#include "compact_markov/series.hpp"

namespace compact_markov {

enum class Verdict { Transient, NullRecurrent, PositiveRecurrent, Inconclusive };

std::string_view to_string(Verdict v);

struct MeanReturnTime {
  double partial_sum = 0.0;  // sum_{n<=N} n f^(n)(x,x), a lower bound of the mean return time
  bool converged = false;
};

/// Converged when the last quarter of the terms adds less than 1e-6 relative.
MeanReturnTime mean_return_time(const Kernel& k, StateId x, std::size_t order, const TruncationPolicy& policy = {});
MeanReturnTime mean_return_time(const FirstReturnTable& table);

/// E[T_x | Z_0 = x] of a finite irreducible chain, as 1/pi(x) by state reduction.
double mean_return_time_exact(const Kernel& k, StateId x);

struct ClassifyThresholds {
  double delta_f = 1e-4;
  /// Tail ratio of successive non-zero f^(n) must stay below 1 - margin for a
  /// geometric tail bound.
  double geometric_margin = 1e-3;
  /// Region size for the absorbing-solve lower bound of F(x,x|1) on infinite chains.
  std::size_t return_probability_states = 100'000;
};

struct ClassificationReport {
  Verdict verdict = Verdict::Inconclusive;
  double f1_estimate = 0.0;   // lower bound of F(x,x|1)
  double f1_upper = 1.0;      // certified upper bound of F(x,x|1), when one is available
  double tau_estimate = 0.0;  // mean return time (lower bound unless converged)
  bool tau_infinite = false;
  bool tau_converged = false;
  double tau_partial_sum = 0.0;
  AbelianEstimate abelian_tau;  // (1 - F(x,x|z)) / (1 - z) as z -> 1-
  std::size_t order_used = 0;
  std::string notes;
};

/// Recurrence verdict at state x. Throws PreconditionError for a reducible finite chain.
ClassificationReport classify(const Kernel& k, StateId x, std::size_t order = 512, const TruncationPolicy& policy = {},
                              const ClassifyThresholds& thresholds = {});

struct StationaryMeasure {
  std::vector<double> probabilities;  // indexed by state

  double at(StateId x) const { return probabilities.at(x.index); }
};

/// Solves pi P = pi, sum pi = 1 for a finite irreducible chain.
StationaryMeasure stationary_measure_finite(const Kernel& k);

}  // namespace compact_markov
