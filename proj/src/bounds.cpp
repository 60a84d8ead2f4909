#include "compact_markov/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

#include "compact_markov/classify.hpp"
#include "compact_markov/errors.hpp"
#include "compact_markov/series.hpp"

namespace compact_markov {

std::string_view to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

double ReversibilityMeasure::at(StateId x) const {
  const auto it = weights.find(x);
  if (it == weights.end()) throw DomainError("state " + std::to_string(x.index) + " is outside the reversibility measure");
  return it->second;
}

double ReversibilityMeasure::mass(std::span<const StateId> set) const {
  double total = 0.0;
  for (StateId x : std::set<StateId>(set.begin(), set.end())) total += at(x);
  return total;
}

namespace {

double weight_to(const RowDistribution& row, StateId y) {
  for (const auto& t : row) {
    if (t.to == y) return t.weight;
  }
  return 0.0;
}

bool balanced(double forward, double backward, double& residual) {
  const double scale = std::max(std::abs(forward), std::abs(backward));
  const double r = scale > 0.0 ? std::abs(forward - backward) / scale : 0.0;
  residual = std::max(residual, r);
  return r <= 1e-9;
}

}  // namespace

std::optional<ReversibilityMeasure> compute_reversibility_measure(const Kernel& k, const TruncationPolicy& policy) {
  policy.validate();
  const StateId anchor{0};
  ReversibilityMeasure m;
  m.anchor = anchor;
  m.complete = true;
  m.weights[anchor] = 1.0;

  std::unordered_map<std::size_t, RowDistribution> rows;
  auto row_of = [&](StateId x) -> const RowDistribution& {
    auto it = rows.find(x.index);
    if (it == rows.end()) it = rows.emplace(x.index, k.row(x)).first;
    return it->second;
  };

  std::vector<StateId> queue{anchor};
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const StateId x = queue[head];
    const double mx = m.weights.at(x);
    for (const auto& t : row_of(x)) {
      const StateId y = t.to;
      if (y == x) continue;
      const auto known = m.weights.find(y);
      if (known != m.weights.end()) {
        const double back = weight_to(row_of(y), x);
        if (back == 0.0 || !balanced(mx * t.weight, known->second * back, m.max_residual)) return std::nullopt;
        continue;
      }
      if (m.weights.size() >= policy.max_states) {
        m.complete = false;
        continue;
      }
      const double back = weight_to(row_of(y), x);
      if (back == 0.0) return std::nullopt;
      const double my = mx * t.weight / back;
      if (!(my >= std::numeric_limits<double>::min()) || !std::isfinite(my)) {
        // Weight leaves the representable range; stop exploring past it.
        m.complete = false;
        continue;
      }
      m.weights[y] = my;
      queue.push_back(y);
    }
  }
  return m;
}

bool ReturnTimeBounds::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.status == CheckStatus::Pass; });
}

ReturnTimeBounds check_return_time_bounds(const Kernel& k, const TightnessCertificate& cert, std::size_t order,
                                          const TruncationPolicy& policy) {
  certify(k, cert.set, cert.epsilon, policy.max_states);
  const double eps = cert.epsilon;
  ReturnTimeBounds out;
  bool all_converged = true;
  out.min_tau = std::numeric_limits<double>::infinity();
  for (StateId x : cert.set) {
    const MeanReturnTime series = mean_return_time(k, x, order, policy);
    ReturnTimeTerm term{x, series.partial_sum, series.converged, false};
    if (!series.converged && k.is_finite()) term = {x, mean_return_time_exact(k, x), true, true};
    all_converged = all_converged && term.converged;
    if (term.tau > 0.0) out.reciprocal_sum += 1.0 / term.tau;
    out.min_tau = std::min(out.min_tau, term.tau);
    out.terms.push_back(term);
  }
  const double card = static_cast<double>(cert.set.size());
  const auto status = [&](bool ok) {
    if (ok) return CheckStatus::Pass;
    return all_converged ? CheckStatus::Fail : CheckStatus::Inconclusive;
  };
  // Unconverged tau are lower bounds, so 1/tau over-estimates: only the
  // upper constraint stays decidable for them.
  out.checks.push_back({"sum_reciprocal_tau_lower", out.reciprocal_sum, ">=", 1.0 - eps,
                        status(out.reciprocal_sum >= (1.0 - eps) - 1e-12)});
  out.checks.push_back({"sum_reciprocal_tau_upper", out.reciprocal_sum, "<=", 1.0,
                        out.reciprocal_sum <= 1.0 + 1e-6 ? CheckStatus::Pass : status(false)});
  out.checks.push_back({"min_tau", out.min_tau, "<=", card / (1.0 - eps),
                        out.min_tau <= card / (1.0 - eps) * (1.0 + 1e-6) ? CheckStatus::Pass : status(false)});
  return out;
}

double HittingTimeDistribution::partial_expectation() const {
  double e = 0.0;
  for (std::size_t n = 1; n <= pmf.size(); ++n) e += static_cast<double>(n) * pmf[n - 1];
  return e;
}

double HittingTimeDistribution::expectation_lower() const {
  return partial_expectation() + static_cast<double>(pmf.size() + 1) * tail;
}

HittingTimeDistribution hitting_time_distribution(const Kernel& k, std::span<const StateId> set, StateId x,
                                                  std::size_t n_max, const TruncationPolicy& policy) {
  if (set.empty()) throw DomainError("target set A must be non-empty");
  if (!k.contains(x)) throw DomainError("source state is not a state of " + k.info().label());
  const std::set<StateId> members(set.begin(), set.end());
  HittingTimeDistribution dist;
  dist.target.assign(members.begin(), members.end());
  dist.source = x;
  dist.pmf.assign(n_max, 0.0);
  dist.survival.assign(n_max + 1, 0.0);
  dist.survival[0] = 1.0;

  MassVector mass = MassVector::point(x);
  for (std::size_t n = 1; n <= n_max; ++n) {
    mass = evolve_distribution(k, mass, policy);
    double absorbed = 0.0;
    for (StateId a : members) absorbed += mass.take(a);
    dist.pmf[n - 1] = absorbed;
    dist.survival[n] = mass.explored_mass() + mass.defect();
  }
  dist.tail = mass.explored_mass();
  dist.defect = mass.defect();
  return dist;
}

std::vector<BoundCheck> check_hitting_bounds(const HittingTimeDistribution& dist, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in [0, 1)");
  std::vector<BoundCheck> checks;
  BoundCheck worst{"survival", 0.0, "<=", 0.0, CheckStatus::Pass};
  double worst_gap = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n <= dist.survival.size(); ++n) {
    const double bound = std::pow(epsilon, static_cast<double>(n - 1));
    const double value = dist.survival[n - 1];
    // Compare relative to the bound so the tightest n is reported, not the largest absolute gap.
    const double gap = bound > 0.0 ? value / bound - (1.0 + 1e-9) : (value > 0.0 ? 1.0 : -1.0);
    if (gap > worst_gap) {
      worst_gap = gap;
      worst.name = "survival_n" + std::to_string(n);
      worst.lhs = value;
      worst.rhs = bound;
    }
  }
  worst.status = worst_gap <= 0.0 ? CheckStatus::Pass : CheckStatus::Fail;
  checks.push_back(worst);

  double expectation = 0.0;
  for (std::size_t n = 1; n <= dist.n_max(); ++n) expectation += dist.survival[n - 1];
  expectation += dist.survival.back() / (1.0 - epsilon);
  const double bound = 1.0 / (1.0 - epsilon);
  checks.push_back({"expected_hitting_time", expectation, "<=", bound,
                    expectation <= bound * (1.0 + 1e-6) ? CheckStatus::Pass : CheckStatus::Fail});
  return checks;
}

std::vector<BoundCheck> check_hitting_bounds(const HittingTimeDistribution& dist, const TightnessCertificate& cert) {
  const std::set<StateId> a(cert.set.begin(), cert.set.end());
  const std::set<StateId> b(dist.target.begin(), dist.target.end());
  if (a != b) throw PreconditionError("certificate set differs from the hitting target");
  return check_hitting_bounds(dist, cert.epsilon);
}

std::vector<MassVector> n_step_rows(const Kernel& k, StateId x, std::size_t steps, const TruncationPolicy& policy) {
  std::vector<MassVector> rows;
  rows.reserve(steps + 1);
  rows.push_back(n_step(k, x, 0, policy));
  for (std::size_t n = 1; n <= steps; ++n) rows.push_back(evolve_distribution(k, rows.back(), policy));
  return rows;
}

ReturnLowerBound reversible_lower_bound(const std::vector<MassVector>& rows, const ReversibilityMeasure& m,
                                  std::span<const StateId> set, StateId x, std::size_t n) {
  if (set.empty()) throw DomainError("set A must be non-empty");
  if (n < 1) throw DomainError("the bound needs n >= 1");
  if (rows.size() < 2 * n + 1) throw DomainError("not enough n-step rows for 2n steps");
  const std::set<StateId> members(set.begin(), set.end());
  ReturnLowerBound check;
  check.n = n;
  check.tail = rows[n].defect();
  for (const auto& [y, mass] : rows[n].entries()) {
    if (!members.contains(y)) check.tail += mass;
  }
  check.tail = std::min(check.tail, 1.0);
  check.lhs = rows[2 * n].at(x);
  const double factor = (1.0 - check.tail) * (1.0 - check.tail);
  check.rhs = factor * m.at(x) / m.mass(set);
  check.pass = check.lhs >= check.rhs - 1e-12;
  return check;
}

ReturnLowerBound reversible_lower_bound(const Kernel& k, const ReversibilityMeasure& m, std::span<const StateId> set,
                                  StateId x, std::size_t n, const TruncationPolicy& policy) {
  if (!m.covers(x)) throw PreconditionError("reversibility measure does not cover state x");
  for (StateId a : set) {
    if (!m.covers(a)) throw PreconditionError("reversibility measure does not cover the set A");
  }
  return reversible_lower_bound(n_step_rows(k, x, 2 * n, policy), m, set, x, n);
}

GreenBoundCheck green_lower_bound(const Kernel& k, const ReversibilityMeasure& m, std::span<const StateId> set,
                                  StateId x, double z, std::size_t order, const TruncationPolicy& policy) {
  if (!(z >= 0.0 && z < 1.0)) throw DomainError("green_lower_bound needs z in [0, 1)");
  const std::set<StateId> members(set.begin(), set.end());
  if (!members.contains(x)) throw PreconditionError("green_lower_bound needs x in A");
  GreenBoundCheck check;
  std::vector<double> coeffs(order + 1, 0.0);
  MassVector mass = MassVector::point(x);
  coeffs[0] = 1.0;
  for (std::size_t n = 1; n <= order; ++n) {
    mass = evolve_distribution(k, mass, policy);
    coeffs[n] = mass.at(x);
    double tail = mass.defect();
    for (const auto& [y, w] : mass.entries()) {
      if (!members.contains(y)) tail += w;
    }
    check.epsilon = std::max(check.epsilon, std::min(tail, 1.0));
  }
  check.lhs = series_eval(TruncatedSeries(std::move(coeffs)), z);
  check.lhs_upper = check.lhs + std::pow(z, static_cast<double>(order + 1)) / (1.0 - z);
  check.rhs = (1.0 - check.epsilon) * (1.0 - check.epsilon) / (1.0 - z * z) * m.at(x) / m.mass(set);
  if (check.lhs >= check.rhs - 1e-9) {
    check.status = CheckStatus::Pass;
  } else if (check.lhs_upper < check.rhs - 1e-9) {
    check.status = CheckStatus::Fail;
  } else {
    check.status = CheckStatus::Inconclusive;
  }
  return check;
}

ProportionalityReport check_m_tau_proportionality(const Kernel& k, const ReversibilityMeasure& m) {
  if (!k.is_finite()) throw DomainError("proportionality check needs a finite chain");
  ProportionalityReport report;
  const std::size_t n = *k.state_count();
  for (std::size_t i = 0; i < n; ++i) {
    const StateId x{i};
    report.products.push_back(m.at(x) * mean_return_time_exact(k, x));
  }
  const auto [lo, hi] = std::minmax_element(report.products.begin(), report.products.end());
  report.ratio = *hi / *lo;
  report.pass = report.ratio <= 1.0 + 1e-6;
  return report;
}

}  // namespace compact_markov
