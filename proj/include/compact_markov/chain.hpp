#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace compact_markov {

/// Canonical label of a state within a chain's enumeration.
struct StateId {
  std::size_t index = 0;

  friend auto operator<=>(const StateId&, const StateId&) = default;
};

struct Transition {
  StateId to;
  double weight = 0.0;
};

/// Outgoing distribution p(x, .) of a single state, in the chain's entry order.
using RowDistribution = std::vector<Transition>;

/// Rows of a stochastic kernel must sum to one within this tolerance.
inline constexpr double kStochasticTolerance = 1e-9;

/// Human-readable identification of a kernel: family name plus parameters.
struct ChainInfo {
  std::string family;
  std::vector<std::pair<std::string, double>> parameters;

  std::string label() const;
};

/// Structural knowledge about the one-step tail sup_x sum_{y not in A} p(x,y)
/// of an infinite family, used where enumerating all rows is impossible.
struct TailStructure {
  /// Certified value of the supremum over every state, for a finite set A.
  std::function<double(std::span<const StateId>)> tail_sup;
  /// Certified lower bound of tail_sup(A) over all finite sets A.
  double finite_set_floor = 0.0;
};

/// The stochastic matrix P, given by a pure row oracle over an enumerable
/// (finite or countably infinite) state space.
class Kernel {
 public:
  using RowOracle = std::function<RowDistribution(StateId)>;

  Kernel(std::optional<std::size_t> state_count, RowOracle row, ChainInfo info,
         std::optional<TailStructure> tail = std::nullopt);

  /// Number of states, or nullopt for an unbounded state space.
  std::optional<std::size_t> state_count() const noexcept { return state_count_; }
  bool is_finite() const noexcept { return state_count_.has_value(); }
  bool contains(StateId x) const noexcept { return !state_count_ || x.index < *state_count_; }

  /// Throws DomainError for a state outside the enumeration.
  RowDistribution row(StateId x) const;

  const ChainInfo& info() const noexcept { return info_; }
  const std::optional<TailStructure>& tail_structure() const noexcept { return tail_; }

 private:
  std::optional<std::size_t> state_count_;
  RowOracle row_;
  ChainInfo info_;
  std::optional<TailStructure> tail_;
};

/// Checks that `row` is a probability distribution over valid states of a
/// chain with `state_count` states; throws ValidationError naming `field`.
void validate_row(const RowDistribution& row, std::optional<std::size_t> state_count,
                  const std::string& field);

/// Finite chain from a dense row-major matrix; zero entries are dropped.
Kernel finite_chain(const std::vector<std::vector<double>>& rows, ChainInfo info = {"finite", {}});

/// The chain on N with p(0,1)=1, p(n,n+1)=1-p, p(n+1,n)=p.
Kernel paper_bd(double p);

/// The same chain restricted to {0, ..., states-1}; the top state keeps its
/// upward mass as holding probability (reflecting top).
Kernel paper_bd_truncated(double p, std::size_t states);

/// Finite birth-death chain: up[i] = p(i,i+1), down[i] = p(i,i-1), the rest
/// stays at i. Requires down[0] = 0 and up[n-1] = 0.
Kernel birth_death(const std::vector<double>& up, const std::vector<double>& down);

/// States 0..M; p(x,x+1)=eps for x<M, p(M,M)=eps, p(x,0)=1-eps for every x.
Kernel funnel(double eps, std::size_t top);

/// Two states that swap deterministically.
Kernel swap_chain();

/// Two states; stay with probability a, switch with probability 1-a.
Kernel lazy_chain(double a);

/// Breadth-first enumeration of the states reachable from `start`.
struct Exploration {
  std::vector<StateId> states;  // discovery order, states[0] == start
  bool complete = false;        // true when no reachable state was left out
};

Exploration explore(const Kernel& k, StateId start, std::size_t max_states);

/// Strong connectivity of a finite kernel.
bool is_irreducible(const Kernel& k);

/// Limits on lazy exploration of infinite chains.
struct TruncationPolicy {
  std::size_t max_states = 10'000;
  double mass_floor = 0.0;  // entries below this are swept into the defect

  void validate() const;
};

/// Sparse sub-probability vector with explicit truncation defect.
class MassVector {
 public:
  MassVector() = default;

  static MassVector point(StateId x);

  double at(StateId x) const;
  bool contains(StateId x) const { return entries_.contains(x); }
  void add(StateId x, double mass);
  /// Removes x and returns the mass it carried.
  double take(StateId x);

  const std::map<StateId, double>& entries() const noexcept { return entries_; }
  std::size_t support_size() const noexcept { return entries_.size(); }

  double defect() const noexcept { return defect_; }
  void add_defect(double mass) { defect_ += mass; }

  /// Mass carried by explicit entries.
  double explored_mass() const;
  /// explored_mass() + defect().
  double total() const { return explored_mass() + defect_; }

 private:
  std::map<StateId, double> entries_;
  double defect_ = 0.0;
};

/// A function in l-infinity: listed values plus a default for everything else.
class BoundedFunction {
 public:
  explicit BoundedFunction(double default_value = 0.0, std::map<StateId, double> values = {});

  static BoundedFunction constant(double c) { return BoundedFunction(c); }
  static BoundedFunction indicator(std::span<const StateId> set);

  double operator()(StateId x) const;
  double sup_norm() const;
  double min_value() const;
  double max_value() const;

 private:
  double default_;
  std::map<StateId, double> values_;
};

/// (Pf)(x) = sum_y p(x,y) f(y).
double apply_operator(const Kernel& k, const BoundedFunction& f, StateId x);

/// One step of the preadjoint: nu -> nu P. Mass that cannot be represented
/// under `policy` moves to the defect, so total mass is preserved.
MassVector evolve_distribution(const Kernel& k, const MassVector& nu,
                               const TruncationPolicy& policy = {});

/// Row x of P^n; entries are lower bounds, exact when the defect is zero.
MassVector n_step(const Kernel& k, StateId x, std::size_t n, const TruncationPolicy& policy = {});

}  // namespace compact_markov
