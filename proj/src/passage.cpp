#include "compact_markov/passage.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "compact_markov/errors.hpp"

namespace compact_markov {

FirstReturnTable first_return_probs(const Kernel& k, StateId x, StateId y, std::size_t order,
                                    const TruncationPolicy& policy) {
  if (order < 1) throw DomainError("first_return_probs needs order >= 1");
  if (!k.contains(y)) throw DomainError("target state is not a state of " + k.info().label());
  FirstReturnTable table{x, y, std::vector<double>(order + 1, 0.0), std::vector<double>(order + 1, 0.0), 0.0, 0.0};
  MassVector mass = MassVector::point(x);
  for (std::size_t n = 1; n <= order; ++n) {
    if (mass.support_size() == 0) break;
    mass = evolve_distribution(k, mass, policy);
    table.f[n] = mass.take(y);
  }
  for (std::size_t n = 1; n <= order; ++n) table.cumulative[n] = table.cumulative[n - 1] + table.f[n];
  table.defect = mass.defect();
  table.remaining = mass.explored_mass();
  return table;
}

TruncatedSeries green_series(const Kernel& k, StateId x, StateId y, std::size_t order, const TruncationPolicy& policy) {
  if (!k.contains(y)) throw DomainError("target state is not a state of " + k.info().label());
  std::vector<double> c(order + 1, 0.0);
  MassVector mass = n_step(k, x, 0, policy);
  c[0] = mass.at(y);
  for (std::size_t n = 1; n <= order; ++n) {
    mass = evolve_distribution(k, mass, policy);
    c[n] = mass.at(y);
  }
  return TruncatedSeries(std::move(c));
}

TruncatedSeries f_series_from_g(const TruncatedSeries& gxy, const TruncatedSeries& gyy, bool x_equals_y) {
  if (std::abs(gyy[0] - 1.0) > 1e-12) throw DomainError("G(y,y|z) must have constant term 1");
  const std::size_t order = std::min(gxy.order(), gyy.order());
  std::vector<double> numerator(gxy.coefficients().begin(), gxy.coefficients().begin() + order + 1);
  if (x_equals_y) numerator[0] -= 1.0;
  return series_div(TruncatedSeries(std::move(numerator)), gyy, order);
}

double closed_form_F00(double p, double z) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("closed_form_F00 needs p in (0, 1)");
  if (!(z >= 0.0 && z <= 1.0)) throw DomainError("closed_form_F00 needs z in [0, 1]");
  const double disc = std::max(0.0, 1.0 - 4.0 * z * z * p * (1.0 - p));
  return 2.0 * p * z * z / (1.0 + std::sqrt(disc));
}

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Transitions of P restricted to an explored region, in local indices.
struct Region {
  Exploration exploration;
  std::unordered_map<std::size_t, int> local;
  std::vector<Triplet> transitions;
};

Region build_region(const Kernel& k, StateId start, std::size_t max_states) {
  Region r{explore(k, start, max_states), {}, {}};
  const auto& states = r.exploration.states;
  for (std::size_t i = 0; i < states.size(); ++i) r.local.emplace(states[i].index, static_cast<int>(i));
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (const auto& t : k.row(states[i])) {
      const auto it = r.local.find(t.to.index);
      if (it != r.local.end()) r.transitions.emplace_back(static_cast<int>(i), it->second, t.weight);
    }
  }
  return r;
}

}  // namespace

struct GreenResolvent::Impl {
  Region region;
};

GreenResolvent::GreenResolvent(const Kernel& k, StateId x, std::size_t max_states)
    : impl_(std::make_unique<Impl>(Impl{build_region(k, x, max_states)})) {}

GreenResolvent::~GreenResolvent() = default;
GreenResolvent::GreenResolvent(GreenResolvent&&) noexcept = default;
GreenResolvent& GreenResolvent::operator=(GreenResolvent&&) noexcept = default;

bool GreenResolvent::complete() const noexcept { return impl_->region.exploration.complete; }

std::size_t GreenResolvent::region_size() const noexcept { return impl_->region.exploration.states.size(); }

double GreenResolvent::operator()(StateId y, double z) const {
  if (!(z >= 0.0 && z <= 1.0)) throw DomainError("resolvent needs z in [0, 1]");
  const auto& region = impl_->region;
  const auto it = region.local.find(y.index);
  if (it == region.local.end()) return 0.0;
  const int n = static_cast<int>(region.exploration.states.size());

  // Row x of (I - zP)^{-1} solves (I - zP)^T r = e_x, with x at local index 0.
  std::vector<Triplet> entries;
  entries.reserve(region.transitions.size() + static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) entries.emplace_back(i, i, 1.0);
  for (const auto& t : region.transitions) entries.emplace_back(t.col(), t.row(), -z * t.value());
  SparseMatrix a(n, n);
  a.setFromTriplets(entries.begin(), entries.end());
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw DomainError("resolvent (I - zP) is singular at z = " + std::to_string(z));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs[0] = 1.0;
  const Eigen::VectorXd r = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !std::isfinite(r[it->second])) {
    throw DomainError("resolvent solve failed at z = " + std::to_string(z));
  }
  return r[it->second];
}

double hitting_probability(const Kernel& k, StateId x, StateId y, std::size_t max_states) {
  if (!k.contains(y)) throw DomainError("target state is not a state of " + k.info().label());
  const Region region = build_region(k, x, max_states);
  const int n = static_cast<int>(region.exploration.states.size());
  const auto target = region.local.find(y.index);
  if (target == region.local.end()) return 0.0;
  const int ty = target->second;

  // h(s) = P_s(reach y at some time >= 1 before leaving the region), s != y.
  // Unknowns keep their local index; row ty is the identity so the system
  // stays square, and h(y) is read back as sum_t p(y,t) [t == y ? 1 : h(t)].
  std::vector<Triplet> entries;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) entries.emplace_back(i, i, 1.0);
  for (const auto& t : region.transitions) {
    if (t.row() == ty) continue;
    if (t.col() == ty) {
      rhs[t.row()] += t.value();
    } else {
      entries.emplace_back(t.row(), t.col(), -t.value());
    }
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(entries.begin(), entries.end());
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) {
    throw PreconditionError("hitting probability system is singular; is the chain irreducible?");
  }
  const Eigen::VectorXd h = lu.solve(rhs);
  if (ty != 0) return std::clamp(h[0], 0.0, 1.0);
  double ret = 0.0;
  for (const auto& t : region.transitions) {
    if (t.row() != ty) continue;
    ret += t.value() * (t.col() == ty ? 1.0 : h[t.col()]);
  }
  return std::clamp(ret, 0.0, 1.0);
}

}  // namespace compact_markov
