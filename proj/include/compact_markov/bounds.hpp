#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "compact_markov/chain.hpp"
#include "compact_markov/tightness.hpp"

namespace compact_markov {

enum class CheckStatus { Pass, Fail, Inconclusive };

std::string_view to_string(CheckStatus s);

/// One inequality "lhs relation rhs" evaluated numerically.
struct BoundCheck {
  std::string name;
  double lhs = 0.0;
  std::string relation;  // "<=" or ">="
  double rhs = 0.0;
  CheckStatus status = CheckStatus::Inconclusive;
};

/// Positive weights with m(x) p(x,y) = m(y) p(y,x) on every explored pair.
struct ReversibilityMeasure {
  std::map<StateId, double> weights;
  StateId anchor;             // m(anchor) = 1
  bool complete = false;      // every state reachable from the anchor was explored
  double max_residual = 0.0;  // largest relative detailed-balance residual seen

  bool covers(StateId x) const { return weights.contains(x); }
  double at(StateId x) const;
  double mass(std::span<const StateId> set) const;
};

/// Solves detailed balance along a breadth-first spanning tree from state 0
/// and checks every other explored edge (Kolmogorov's cycle condition on the
/// fundamental cycles). nullopt when the chain is not reversible.
std::optional<ReversibilityMeasure> compute_reversibility_measure(const Kernel& k, const TruncationPolicy& policy = {});

struct ReturnTimeTerm {
  StateId state;
  double tau = 0.0;
  bool converged = false;
  bool exact = false;  // taken from the absorbing solve instead of the series
};

struct ReturnTimeBounds {
  std::vector<ReturnTimeTerm> terms;
  double reciprocal_sum = 0.0;
  double min_tau = 0.0;
  std::vector<BoundCheck> checks;
  bool all_pass() const;
};

/// 1 >= sum_{x in A} 1/tau_x >= 1 - eps and min_{x in A} tau_x <= |A| / (1 - eps).
ReturnTimeBounds check_return_time_bounds(const Kernel& k, const TightnessCertificate& cert, std::size_t order = 512,
                                          const TruncationPolicy& policy = {});

/// Law of T_A = inf{n > 0 : Z_n in A} from Z_0 = x, by forward absorption.
struct HittingTimeDistribution {
  std::vector<StateId> target;
  StateId source;
  std::vector<double> pmf;       // pmf[n-1] = P(T_A = n), n = 1..n_max
  std::vector<double> survival;  // survival[n-1] = P(T_A >= n), n = 1..n_max+1, defect included
  double tail = 0.0;             // P(T_A > n_max) on explored states
  double defect = 0.0;

  std::size_t n_max() const noexcept { return pmf.size(); }
  double survival_at(std::size_t n) const { return survival.at(n - 1); }
  /// sum_{n<=n_max} n P(T_A = n).
  double partial_expectation() const;
  /// E[min(T_A, n_max+1)], a lower bound of E[T_A].
  double expectation_lower() const;
};

HittingTimeDistribution hitting_time_distribution(const Kernel& k, std::span<const StateId> set, StateId x,
                                                  std::size_t n_max, const TruncationPolicy& policy = {});

/// P(T_A >= n) <= eps^{n-1} for every n and E[T_A] <= 1/(1-eps). The tail of
/// the expectation beyond n_max is bounded by P(T_A >= n_max+1)/(1-eps).
std::vector<BoundCheck> check_hitting_bounds(const HittingTimeDistribution& dist, double epsilon);
std::vector<BoundCheck> check_hitting_bounds(const HittingTimeDistribution& dist, const TightnessCertificate& cert);

struct ReturnLowerBound {
  std::size_t n = 0;
  double tail = 0.0;  // eps_n = sum_{y not in A} p^(n)(x,y), defect included
  double lhs = 0.0;   // p^(2n)(x,x)
  double rhs = 0.0;   // (1 - eps_n)^2 m(x) / m(A)
  bool pass = false;
};

/// Lower bound of p^(2n)(x,x) for reversible chains under the per-(x, n) tail hypothesis.
ReturnLowerBound reversible_lower_bound(const Kernel& k, const ReversibilityMeasure& m, std::span<const StateId> set,
                                  StateId x, std::size_t n, const TruncationPolicy& policy = {});

/// Rows p^(0)(x,.) .. p^(steps)(x,.), reused by sweeps over sets and n.
std::vector<MassVector> n_step_rows(const Kernel& k, StateId x, std::size_t steps, const TruncationPolicy& policy = {});

ReturnLowerBound reversible_lower_bound(const std::vector<MassVector>& rows, const ReversibilityMeasure& m,
                                  std::span<const StateId> set, StateId x, std::size_t n);

struct GreenBoundCheck {
  double epsilon = 0.0;    // max_{n<=N} sum_{y not in A} p^(n)(x,y)
  double lhs = 0.0;        // truncated G(x,x|z), a lower bound
  double lhs_upper = 0.0;  // lhs + z^{N+1}/(1-z)
  double rhs = 0.0;        // (1-eps)^2/(1-z^2) m(x)/m(A)
  CheckStatus status = CheckStatus::Inconclusive;
};

/// G(x,x|z) >= (1-eps)^2/(1-z^2) m(x)/m(A) for x in A, z in [0,1).
GreenBoundCheck green_lower_bound(const Kernel& k, const ReversibilityMeasure& m, std::span<const StateId> set,
                                  StateId x, double z, std::size_t order = 512, const TruncationPolicy& policy = {});

struct ProportionalityReport {
  std::vector<double> products;  // m(x) tau_x per state
  double ratio = 0.0;            // max / min
  bool pass = false;
};

/// m(x) tau_x is constant on a finite reversible chain.
ProportionalityReport check_m_tau_proportionality(const Kernel& k, const ReversibilityMeasure& m);

}  // namespace compact_markov
