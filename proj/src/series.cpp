#include "compact_markov/series.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "compact_markov/errors.hpp"

namespace compact_markov {

TruncatedSeries::TruncatedSeries(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) throw DomainError("a truncated series needs at least one coefficient");
  for (double c : coeffs_) {
    if (!std::isfinite(c)) throw DomainError("series coefficients must be finite");
  }
}

TruncatedSeries TruncatedSeries::truncated(std::size_t order) const {
  std::vector<double> c(order + 1, 0.0);
  std::copy_n(coeffs_.begin(), std::min(coeffs_.size(), c.size()), c.begin());
  return TruncatedSeries(std::move(c));
}

namespace {

template <typename Op>
TruncatedSeries zip(const TruncatedSeries& a, const TruncatedSeries& b, Op op) {
  const std::size_t n = std::min(a.order(), b.order()) + 1;
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = op(a[i], b[i]);
  return TruncatedSeries(std::move(c));
}

}  // namespace

TruncatedSeries series_add(const TruncatedSeries& a, const TruncatedSeries& b) {
  return zip(a, b, [](double x, double y) { return x + y; });
}

TruncatedSeries series_sub(const TruncatedSeries& a, const TruncatedSeries& b) {
  return zip(a, b, [](double x, double y) { return x - y; });
}

TruncatedSeries series_scale(const TruncatedSeries& a, double c) {
  std::vector<double> out(a.coefficients().begin(), a.coefficients().end());
  for (double& x : out) x *= c;
  return TruncatedSeries(std::move(out));
}

TruncatedSeries series_mul(const TruncatedSeries& a, const TruncatedSeries& b) {
  const std::size_t n = std::min(a.order(), b.order());
  std::vector<double> c(n + 1, 0.0);
  for (std::size_t i = 0; i <= n; ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; i + j <= n; ++j) c[i + j] += a[i] * b[j];
  }
  return TruncatedSeries(std::move(c));
}

TruncatedSeries series_div(const TruncatedSeries& a, const TruncatedSeries& b, std::optional<std::size_t> order) {
  const double lead = b[0];
  if (!(std::abs(lead) > 1e-12)) throw DivisionError("series division needs a non-vanishing constant term");
  const std::size_t n = order.value_or(std::max(a.order(), b.order()));
  std::vector<double> q(n + 1, 0.0);
  for (std::size_t i = 0; i <= n; ++i) {
    double acc = a[i];
    const std::size_t kmax = std::min(i, b.order());
    for (std::size_t k = 1; k <= kmax; ++k) acc -= b[k] * q[i - k];
    q[i] = acc / lead;
  }
  return TruncatedSeries(std::move(q));
}

double series_eval(const TruncatedSeries& a, double z) {
  if (!(z >= 0.0 && z <= 1.0)) throw DomainError("series evaluation needs z in [0, 1]");
  const auto c = a.coefficients();
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
  return acc;
}

AbelianEstimate abelian_limit(const std::function<double(double)>& g, const AbelianOptions& options) {
  if (options.first_exponent < 1 || options.last_exponent < options.first_exponent + 2) {
    throw DomainError("abelian grid needs at least three points");
  }
  AbelianEstimate est;
  for (int k = options.first_exponent; k <= options.last_exponent; ++k) {
    const double z = 1.0 - std::ldexp(1.0, -k);
    const double v = g(z);
    if (!std::isfinite(v)) throw EvaluationError("abelian limit: g(" + std::to_string(z) + ") is not finite");
    est.samples.emplace_back(z, v);
  }
  const std::size_t n = est.samples.size();
  const double last = est.samples.back().second;
  est.value = last;
  const double scale = std::max(std::abs(last), 1e-300);
  est.converged = std::abs(est.samples[n - 2].second - last) <= options.relative_tolerance * scale &&
                  std::abs(est.samples[n - 3].second - last) <= options.relative_tolerance * scale;
  est.increasing = true;
  for (std::size_t i = 1; i < n; ++i) est.increasing = est.increasing && est.samples[i].second > est.samples[i - 1].second;
  if (!est.converged && est.increasing && last > options.divergence_threshold) est.infinite = true;
  return est;
}

}  // namespace compact_markov
