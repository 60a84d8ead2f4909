#include "compact_markov/chain.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <memory>
#include <set>
#include <sstream>
#include <unordered_set>

#include "compact_markov/errors.hpp"

namespace compact_markov {

std::string ChainInfo::label() const {
  std::ostringstream out;
  out << family;
  if (!parameters.empty()) {
    out << '(';
    for (std::size_t i = 0; i < parameters.size(); ++i) {
      if (i > 0) out << ", ";
      out << parameters[i].first << '=' << parameters[i].second;
    }
    out << ')';
  }
  return out.str();
}

Kernel::Kernel(std::optional<std::size_t> state_count, RowOracle row, ChainInfo info,
               std::optional<TailStructure> tail)
    : state_count_(state_count), row_(std::move(row)), info_(std::move(info)), tail_(std::move(tail)) {
  if (state_count_ && *state_count_ == 0) throw DomainError("kernel must have at least one state");
  if (!row_) throw DomainError("kernel requires a row oracle");
}

RowDistribution Kernel::row(StateId x) const {
  if (!contains(x)) {
    throw DomainError("state " + std::to_string(x.index) + " is not a state of " + info_.label());
  }
  return row_(x);
}

void validate_row(const RowDistribution& row, std::optional<std::size_t> state_count,
                  const std::string& field) {
  if (row.empty()) throw ValidationError(field, "row has no transitions");
  std::set<StateId> seen;
  double sum = 0.0;
  for (const auto& t : row) {
    if (!std::isfinite(t.weight) || t.weight <= 0.0 || t.weight > 1.0 + kStochasticTolerance) {
      throw ValidationError(field, "transition weight must lie in (0, 1]");
    }
    if (state_count && t.to.index >= *state_count) {
      throw ValidationError(field, "transition to unknown state " + std::to_string(t.to.index));
    }
    if (!seen.insert(t.to).second) {
      throw ValidationError(field, "duplicate target state " + std::to_string(t.to.index));
    }
    sum += t.weight;
  }
  if (std::abs(sum - 1.0) > kStochasticTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "row sums to " << sum << ", expected 1";
    throw ValidationError(field, msg.str());
  }
}

namespace {

void require_open_unit(double value, const std::string& field) {
  if (!(value > 0.0 && value < 1.0)) throw ValidationError(field, "must lie in the open interval (0, 1)");
}

Kernel from_rows(std::vector<RowDistribution> rows, ChainInfo info) {
  const std::size_t n = rows.size();
  for (std::size_t i = 0; i < n; ++i) validate_row(rows[i], n, "rows[" + std::to_string(i) + "]");
  auto shared = std::make_shared<const std::vector<RowDistribution>>(std::move(rows));
  return Kernel(n, [shared](StateId x) { return (*shared)[x.index]; }, std::move(info));
}

}  // namespace

Kernel finite_chain(const std::vector<std::vector<double>>& rows, ChainInfo info) {
  if (rows.empty()) throw ValidationError("rows", "matrix has no rows");
  std::vector<RowDistribution> dist(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) {
      throw ValidationError("rows[" + std::to_string(i) + "]", "matrix must be square");
    }
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      const double w = rows[i][j];
      if (!std::isfinite(w) || w < 0.0) {
        throw ValidationError("rows[" + std::to_string(i) + "]", "entries must be finite and non-negative");
      }
      if (w > 0.0) dist[i].push_back({StateId{j}, w});
    }
  }
  return from_rows(std::move(dist), std::move(info));
}

Kernel paper_bd(double p) {
  require_open_unit(p, "p");
  TailStructure tail;
  // Beyond max(A)+1 both neighbours of a state lie outside A.
  tail.tail_sup = [](std::span<const StateId> set) {
    if (set.empty()) throw DomainError("tail set must be non-empty");
    return 1.0;
  };
  tail.finite_set_floor = 1.0;
  return Kernel(
      std::nullopt,
      [p](StateId x) -> RowDistribution {
        if (x.index == 0) return {{StateId{1}, 1.0}};
        return {{StateId{x.index - 1}, p}, {StateId{x.index + 1}, 1.0 - p}};
      },
      ChainInfo{"paper_bd", {{"p", p}}}, std::move(tail));
}

Kernel paper_bd_truncated(double p, std::size_t states) {
  require_open_unit(p, "p");
  if (states < 2) throw ValidationError("states", "truncation needs at least two states");
  std::vector<RowDistribution> rows(states);
  rows[0] = {{StateId{1}, 1.0}};
  for (std::size_t n = 1; n + 1 < states; ++n) {
    rows[n] = {{StateId{n - 1}, p}, {StateId{n + 1}, 1.0 - p}};
  }
  rows[states - 1] = {{StateId{states - 2}, p}, {StateId{states - 1}, 1.0 - p}};
  return from_rows(std::move(rows),
                   ChainInfo{"paper_bd_truncated", {{"p", p}, {"states", static_cast<double>(states)}}});
}

Kernel birth_death(const std::vector<double>& up, const std::vector<double>& down) {
  if (up.empty()) throw ValidationError("up", "needs at least one state");
  if (up.size() != down.size()) throw ValidationError("down", "must have the same length as up");
  const std::size_t n = up.size();
  std::vector<RowDistribution> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string at = "[" + std::to_string(i) + "]";
    if (!std::isfinite(up[i]) || up[i] < 0.0 || up[i] > 1.0) throw ValidationError("up" + at, "must lie in [0, 1]");
    if (!std::isfinite(down[i]) || down[i] < 0.0 || down[i] > 1.0) {
      throw ValidationError("down" + at, "must lie in [0, 1]");
    }
    if (up[i] + down[i] > 1.0 + kStochasticTolerance) throw ValidationError("up" + at, "up + down exceeds 1");
  }
  if (down[0] != 0.0) throw ValidationError("down[0]", "state 0 cannot move down");
  if (up[n - 1] != 0.0) throw ValidationError("up[" + std::to_string(n - 1) + "]", "top state cannot move up");
  for (std::size_t i = 0; i < n; ++i) {
    if (down[i] > 0.0) rows[i].push_back({StateId{i - 1}, down[i]});
    const double hold = 1.0 - up[i] - down[i];
    if (hold > 0.0) rows[i].push_back({StateId{i}, hold});
    if (up[i] > 0.0) rows[i].push_back({StateId{i + 1}, up[i]});
  }
  return from_rows(std::move(rows), ChainInfo{"birth_death", {{"states", static_cast<double>(n)}}});
}

Kernel funnel(double eps, std::size_t top) {
  require_open_unit(eps, "eps");
  if (top < 1) throw ValidationError("M", "must be at least 1");
  std::vector<RowDistribution> rows(top + 1);
  for (std::size_t x = 0; x <= top; ++x) {
    const std::size_t next = x < top ? x + 1 : top;
    rows[x] = {{StateId{0}, 1.0 - eps}, {StateId{next}, eps}};
  }
  return from_rows(std::move(rows), ChainInfo{"funnel", {{"eps", eps}, {"M", static_cast<double>(top)}}});
}

Kernel swap_chain() { return finite_chain({{0.0, 1.0}, {1.0, 0.0}}, ChainInfo{"swap", {}}); }

Kernel lazy_chain(double a) {
  require_open_unit(a, "p");
  return finite_chain({{a, 1.0 - a}, {1.0 - a, a}}, ChainInfo{"lazy", {{"p", a}}});
}

Exploration explore(const Kernel& k, StateId start, std::size_t max_states) {
  if (!k.contains(start)) throw DomainError("exploration start is not a state of " + k.info().label());
  if (max_states == 0) throw DomainError("exploration needs max_states >= 1");
  Exploration result;
  result.complete = true;
  std::unordered_set<std::size_t> seen{start.index};
  result.states.push_back(start);
  for (std::size_t head = 0; head < result.states.size(); ++head) {
    for (const auto& t : k.row(result.states[head])) {
      if (seen.contains(t.to.index)) continue;
      if (result.states.size() >= max_states) {
        result.complete = false;
        continue;
      }
      seen.insert(t.to.index);
      result.states.push_back(t.to);
    }
  }
  return result;
}

bool is_irreducible(const Kernel& k) {
  if (!k.is_finite()) throw DomainError("irreducibility check needs a finite chain");
  const std::size_t n = *k.state_count();
  std::vector<std::vector<std::size_t>> reverse(n);
  for (std::size_t x = 0; x < n; ++x) {
    for (const auto& t : k.row(StateId{x})) reverse[t.to.index].push_back(x);
  }
  if (explore(k, StateId{0}, n).states.size() != n) return false;
  std::vector<bool> seen(n, false);
  std::deque<std::size_t> queue{0};
  seen[0] = true;
  std::size_t reached = 1;
  while (!queue.empty()) {
    const std::size_t y = queue.front();
    queue.pop_front();
    for (std::size_t x : reverse[y]) {
      if (!seen[x]) {
        seen[x] = true;
        ++reached;
        queue.push_back(x);
      }
    }
  }
  return reached == n;
}

void TruncationPolicy::validate() const {
  if (max_states < 1) throw DomainError("TruncationPolicy.max_states must be >= 1");
  if (!(mass_floor >= 0.0 && mass_floor <= 1e-3)) throw DomainError("TruncationPolicy.mass_floor must lie in [0, 1e-3]");
}

MassVector MassVector::point(StateId x) {
  MassVector v;
  v.entries_[x] = 1.0;
  return v;
}

double MassVector::at(StateId x) const {
  const auto it = entries_.find(x);
  return it == entries_.end() ? 0.0 : it->second;
}

void MassVector::add(StateId x, double mass) {
  if (!(mass >= 0.0) || !std::isfinite(mass)) throw DomainError("mass must be finite and non-negative");
  entries_[x] += mass;
}

double MassVector::take(StateId x) {
  const auto it = entries_.find(x);
  if (it == entries_.end()) return 0.0;
  const double mass = it->second;
  entries_.erase(it);
  return mass;
}

double MassVector::explored_mass() const {
  double sum = 0.0;
  for (const auto& [x, mass] : entries_) sum += mass;
  return sum;
}

BoundedFunction::BoundedFunction(double default_value, std::map<StateId, double> values)
    : default_(default_value), values_(std::move(values)) {
  if (!std::isfinite(default_)) throw DomainError("bounded function default must be finite");
  for (const auto& [x, v] : values_) {
    if (!std::isfinite(v)) throw DomainError("bounded function values must be finite");
  }
}

BoundedFunction BoundedFunction::indicator(std::span<const StateId> set) {
  std::map<StateId, double> values;
  for (StateId x : set) values[x] = 1.0;
  return BoundedFunction(0.0, std::move(values));
}

double BoundedFunction::operator()(StateId x) const {
  const auto it = values_.find(x);
  return it == values_.end() ? default_ : it->second;
}

double BoundedFunction::sup_norm() const { return std::max(std::abs(min_value()), std::abs(max_value())); }

double BoundedFunction::min_value() const {
  double m = default_;
  for (const auto& [x, v] : values_) m = std::min(m, v);
  return m;
}

double BoundedFunction::max_value() const {
  double m = default_;
  for (const auto& [x, v] : values_) m = std::max(m, v);
  return m;
}

double apply_operator(const Kernel& k, const BoundedFunction& f, StateId x) {
  double sum = 0.0;
  for (const auto& t : k.row(x)) sum += t.weight * f(t.to);
  return sum;
}

MassVector evolve_distribution(const Kernel& k, const MassVector& nu, const TruncationPolicy& policy) {
  policy.validate();
  MassVector out;
  out.add_defect(nu.defect());
  std::size_t admitted = nu.support_size();
  for (const auto& [x, mass] : nu.entries()) {
    for (const auto& t : k.row(x)) {
      const double moved = mass * t.weight;
      // States outside the current support are admitted in discovery order
      // until the cap is reached; mass bound for the rest becomes defect.
      if (!out.contains(t.to) && !nu.contains(t.to)) {
        if (admitted >= policy.max_states) {
          out.add_defect(moved);
          continue;
        }
        ++admitted;
      }
      out.add(t.to, moved);
    }
  }
  if (policy.mass_floor > 0.0) {
    std::vector<StateId> swept;
    for (const auto& [y, mass] : out.entries()) {
      if (mass < policy.mass_floor) swept.push_back(y);
    }
    for (StateId y : swept) out.add_defect(out.take(y));
  }
  return out;
}

MassVector n_step(const Kernel& k, StateId x, std::size_t n, const TruncationPolicy& policy) {
  if (!k.contains(x)) throw DomainError("state " + std::to_string(x.index) + " is not a state of " + k.info().label());
  MassVector v = MassVector::point(x);
  for (std::size_t i = 0; i < n; ++i) v = evolve_distribution(k, v, policy);
  return v;
}

}  // namespace compact_markov
