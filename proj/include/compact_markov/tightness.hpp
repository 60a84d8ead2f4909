#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "compact_markov/chain.hpp"

namespace compact_markov {

struct TailSup {
  double value = 0.0;
  bool exhaustive = false;  // true iff value is the supremum over every state
  std::size_t states_examined = 0;
};

/// sup_x sum_{y not in A} p(x,y). Exact for finite chains; infinite chains use
/// their family's tail structure when available, otherwise the sup over the
/// first `budget` states (exhaustive = false).
TailSup tail_sup(const Kernel& k, std::span<const StateId> set, std::size_t budget = 10'000);

/// A finite set A with sup_x sum_{y not in A} p(x,y) < epsilon.
struct TightnessCertificate {
  std::vector<StateId> set;
  double epsilon = 0.0;
  double achieved_tail = 0.0;
  bool exhaustive = false;
  std::size_t states_explored = 0;
};

struct TightSetSearch {
  std::optional<TightnessCertificate> certificate;
  std::vector<StateId> best_set;  // last set tried
  double best_tail = 1.0;         // its explored tail sup
  bool structurally_refuted = false;
  std::size_t states_explored = 0;
  std::string diagnostics;
};

/// Greedy growth of A: each round adds the state that lowers the explored tail
/// sup the most (ties: most incoming mass, then lowest index).
TightSetSearch find_tight_set(const Kernel& k, double epsilon, std::size_t budget = 10'000);

/// Checks a certificate against the chain; throws PreconditionError when the
/// tail sup is not certified below epsilon.
TightnessCertificate certify(const Kernel& k, std::span<const StateId> set, double epsilon, std::size_t budget = 10'000);

struct TailCheckRow {
  std::size_t n = 0;
  double value = 0.0;  // sup over examined x of P(Z_n not in A | Z_0 = x), defect counted
  bool pass = false;
};

/// The n-step consequence sup_x sum_{y not in A} p^(n)(x,y) < epsilon for n = 1..n_max.
std::vector<TailCheckRow> n_step_tail_check(const Kernel& k, std::span<const StateId> set, double epsilon,
                                            std::size_t n_max, const TruncationPolicy& policy = {});

enum class CompactnessStatus { Satisfied, Refuted, Inconclusive };

std::string_view to_string(CompactnessStatus s);

struct CompactnessEntry {
  double epsilon = 0.0;
  std::optional<TightnessCertificate> certificate;
  bool refuted = false;
  bool fallback = false;  // finite chain certified with A = X
  double best_tail = 1.0;
};

struct CompactnessReport {
  CompactnessStatus status = CompactnessStatus::Inconclusive;
  std::optional<double> satisfied_down_to;
  std::optional<double> refuted_at;
  std::vector<CompactnessEntry> entries;
  std::string summary;
};

inline const std::vector<double> kDefaultEpsilonGrid{0.5, 0.2, 0.1, 0.05, 0.01};

CompactnessReport compactness_verdict(const Kernel& k, const std::vector<double>& epsilon_grid = kDefaultEpsilonGrid,
                                      std::size_t budget = 10'000);

}  // namespace compact_markov
