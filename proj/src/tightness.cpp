#include "compact_markov/tightness.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "compact_markov/errors.hpp"

namespace compact_markov {

namespace {

std::set<StateId> to_set(const Kernel& k, std::span<const StateId> set) {
  if (set.empty()) throw DomainError("tail set A must be non-empty");
  std::set<StateId> out;
  for (StateId a : set) {
    if (!k.contains(a)) throw DomainError("state " + std::to_string(a.index) + " of A is not a state of " + k.info().label());
    out.insert(a);
  }
  return out;
}

double row_tail(const RowDistribution& row, const std::set<StateId>& set) {
  double tail = 0.0;
  for (const auto& t : row) {
    if (!set.contains(t.to)) tail += t.weight;
  }
  return tail;
}

std::size_t examined_states(const Kernel& k, std::size_t budget) {
  return k.is_finite() ? *k.state_count() : budget;
}

}  // namespace

TailSup tail_sup(const Kernel& k, std::span<const StateId> set, std::size_t budget) {
  const auto members = to_set(k, set);
  if (!k.is_finite() && k.tail_structure()) {
    const std::vector<StateId> ordered(members.begin(), members.end());
    return {k.tail_structure()->tail_sup(ordered), true, 0};
  }
  const std::size_t n = examined_states(k, budget);
  double sup = 0.0;
  for (std::size_t x = 0; x < n; ++x) sup = std::max(sup, row_tail(k.row(StateId{x}), members));
  return {sup, k.is_finite(), n};
}

TightnessCertificate certify(const Kernel& k, std::span<const StateId> set, double epsilon, std::size_t budget) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
  const TailSup tail = tail_sup(k, set, budget);
  if (!tail.exhaustive) throw PreconditionError("tail supremum of A is not certified over the whole state space");
  if (!(tail.value < epsilon)) {
    std::ostringstream msg;
    msg << "tail supremum " << tail.value << " is not below epsilon " << epsilon;
    throw PreconditionError(msg.str());
  }
  const auto members = to_set(k, set);
  return {std::vector<StateId>(members.begin(), members.end()), epsilon, tail.value, true, tail.states_examined};
}

TightSetSearch find_tight_set(const Kernel& k, double epsilon, std::size_t budget) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
  TightSetSearch search;
  if (k.tail_structure() && k.tail_structure()->finite_set_floor >= epsilon) {
    search.structurally_refuted = true;
    search.best_tail = k.tail_structure()->finite_set_floor;
    std::ostringstream msg;
    msg << "every finite set leaves tail mass >= " << k.tail_structure()->finite_set_floor << " (structural bound of "
        << k.info().label() << ")";
    search.diagnostics = msg.str();
    return search;
  }

  const std::size_t n = std::min(examined_states(k, budget), budget);
  search.states_explored = n;
  // tail[x]: mass of row x outside the current A; incoming[y]: rows feeding y.
  std::vector<double> tail(n, 0.0);
  std::vector<std::unordered_map<std::size_t, double>> incoming(n);
  std::vector<double> incoming_mass(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    for (const auto& t : k.row(StateId{x})) {
      tail[x] += t.weight;
      if (t.to.index < n) {
        incoming[t.to.index][x] += t.weight;
        incoming_mass[t.to.index] += t.weight;
      }
    }
  }
  std::vector<bool> chosen(n, false);
  std::vector<std::size_t> order(n);

  while (search.best_set.size() < n) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return tail[a] > tail[b]; });

    std::size_t best = n;
    double best_sup = 2.0;
    for (std::size_t y = 0; y < n; ++y) {
      if (chosen[y]) continue;
      double sup = -1.0;
      for (std::size_t x : order) {
        if (tail[x] <= sup) break;
        const auto it = incoming[y].find(x);
        sup = std::max(sup, it == incoming[y].end() ? tail[x] : tail[x] - it->second);
      }
      const bool better = best == n || sup < best_sup ||
                          (sup == best_sup && incoming_mass[y] > incoming_mass[best]);
      if (better) {
        best = y;
        best_sup = sup;
      }
    }
    chosen[best] = true;
    search.best_set.push_back(StateId{best});
    for (const auto& [x, w] : incoming[best]) tail[x] -= w;
    search.best_tail = std::max(0.0, *std::max_element(tail.begin(), tail.end()));

    if (search.best_tail < epsilon) {
      const TailSup full = tail_sup(k, search.best_set, budget);
      search.best_tail = full.value;
      if (full.exhaustive && full.value < epsilon) {
        auto sorted = search.best_set;
        std::sort(sorted.begin(), sorted.end());
        search.certificate = TightnessCertificate{sorted, epsilon, full.value, true, n};
        return search;
      }
      if (!full.exhaustive) {
        search.diagnostics = "explored tail is below epsilon but the supremum over unexplored states is not certified";
        return search;
      }
    }
  }
  std::ostringstream msg;
  msg << "budget of " << n << " states exhausted; best explored tail " << search.best_tail;
  search.diagnostics = msg.str();
  return search;
}

std::vector<TailCheckRow> n_step_tail_check(const Kernel& k, std::span<const StateId> set, double epsilon,
                                            std::size_t n_max, const TruncationPolicy& policy) {
  const TightnessCertificate cert = certify(k, set, epsilon, policy.max_states);
  const std::set<StateId> members(cert.set.begin(), cert.set.end());
  const std::size_t states = examined_states(k, policy.max_states);
  std::vector<TailCheckRow> rows(n_max);
  for (std::size_t n = 1; n <= n_max; ++n) rows[n - 1].n = n;
  for (std::size_t x = 0; x < states; ++x) {
    MassVector mass = MassVector::point(StateId{x});
    for (std::size_t n = 1; n <= n_max; ++n) {
      mass = evolve_distribution(k, mass, policy);
      double outside = mass.defect();
      for (const auto& [y, m] : mass.entries()) {
        if (!members.contains(y)) outside += m;
      }
      rows[n - 1].value = std::max(rows[n - 1].value, outside);
    }
  }
  for (auto& row : rows) row.pass = row.value < epsilon;
  return rows;
}

std::string_view to_string(CompactnessStatus s) {
  switch (s) {
    case CompactnessStatus::Satisfied: return "satisfied";
    case CompactnessStatus::Refuted: return "refuted";
    case CompactnessStatus::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

CompactnessReport compactness_verdict(const Kernel& k, const std::vector<double>& epsilon_grid, std::size_t budget) {
  CompactnessReport report;
  std::vector<double> grid = epsilon_grid;
  std::sort(grid.begin(), grid.end(), std::greater<>());
  bool all_satisfied = !grid.empty();
  for (double eps : grid) {
    CompactnessEntry entry;
    entry.epsilon = eps;
    TightSetSearch search = find_tight_set(k, eps, budget);
    entry.best_tail = search.best_tail;
    entry.refuted = search.structurally_refuted;
    if (search.certificate) {
      entry.certificate = std::move(search.certificate);
    } else if (k.is_finite()) {
      std::vector<StateId> everything(*k.state_count());
      for (std::size_t i = 0; i < everything.size(); ++i) everything[i] = StateId{i};
      entry.certificate = certify(k, everything, eps, budget);
      entry.fallback = true;
    }
    if (entry.certificate) {
      entry.best_tail = entry.certificate->achieved_tail;
      report.satisfied_down_to = eps;
    } else {
      all_satisfied = false;
    }
    if (entry.refuted && !report.refuted_at) report.refuted_at = eps;
    report.entries.push_back(std::move(entry));
  }
  std::ostringstream summary;
  if (all_satisfied) {
    report.status = CompactnessStatus::Satisfied;
    summary << "criterion satisfied down to epsilon=" << *report.satisfied_down_to;
  } else if (report.refuted_at) {
    report.status = CompactnessStatus::Refuted;
    summary << "refuted at epsilon=" << *report.refuted_at << ": no finite set works";
  } else {
    report.status = CompactnessStatus::Inconclusive;
    summary << "inconclusive within budget " << budget;
    if (report.satisfied_down_to) summary << " (satisfied down to epsilon=" << *report.satisfied_down_to << ")";
  }
  report.summary = summary.str();
  return report;
}

}  // namespace compact_markov
