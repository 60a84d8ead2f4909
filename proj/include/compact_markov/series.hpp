#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace compact_markov {

/// Coefficients c_0..c_N of a real power series.
class TruncatedSeries {
 public:
  TruncatedSeries() : coeffs_{0.0} {}
  /// Throws DomainError when empty or when a coefficient is not finite.
  explicit TruncatedSeries(std::vector<double> coeffs);

  static TruncatedSeries zero(std::size_t order) { return TruncatedSeries(std::vector<double>(order + 1, 0.0)); }

  std::size_t order() const noexcept { return coeffs_.size() - 1; }
  /// Coefficient n; zero beyond the stored order.
  double operator[](std::size_t n) const noexcept { return n < coeffs_.size() ? coeffs_[n] : 0.0; }
  std::span<const double> coefficients() const noexcept { return coeffs_; }

  /// Same series cut (or zero-extended) to the given order.
  TruncatedSeries truncated(std::size_t order) const;

 private:
  std::vector<double> coeffs_;
};

// Coefficient-wise operations, up to the smaller of the two orders.
TruncatedSeries series_add(const TruncatedSeries& a, const TruncatedSeries& b);
TruncatedSeries series_sub(const TruncatedSeries& a, const TruncatedSeries& b);
TruncatedSeries series_scale(const TruncatedSeries& a, double c);

/// Cauchy product, up to the smaller of the two orders.
TruncatedSeries series_mul(const TruncatedSeries& a, const TruncatedSeries& b);

/// Quotient q with q*b = a through `order` (default: the larger operand order,
/// with missing coefficients read as zero). Throws DivisionError if |b_0| <= 1e-12.
TruncatedSeries series_div(const TruncatedSeries& a, const TruncatedSeries& b,
                           std::optional<std::size_t> order = std::nullopt);

/// Horner evaluation of the stored polynomial, z in [0, 1]. For non-negative
/// coefficients this is a lower bound of the full series.
double series_eval(const TruncatedSeries& a, double z);

/// Outcome of sampling g(z) as z -> 1-.
struct AbelianEstimate {
  double value = 0.0;
  bool infinite = false;
  bool converged = false;
  bool increasing = false;  // samples strictly increasing in z
  std::vector<std::pair<double, double>> samples;
};

struct AbelianOptions {
  int first_exponent = 3;  // z_k = 1 - 2^-k
  int last_exponent = 20;
  double relative_tolerance = 1e-3;
  double divergence_threshold = 1e9;
};

/// Samples g at z_k = 1 - 2^-k and accepts the last sample once the last
/// three agree to the relative tolerance. Throws EvaluationError when g
/// returns a non-finite value.
AbelianEstimate abelian_limit(const std::function<double(double)>& g, const AbelianOptions& options = {});

}  // namespace compact_markov
