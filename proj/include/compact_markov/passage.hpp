#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "compact_markov/chain.hpp"
#include "compact_markov/series.hpp"

namespace compact_markov {

/// First-visit probabilities f^(n)(x,y) = P(Z_n = y, Z_i != y for 0<i<n | Z_0 = x).
struct FirstReturnTable {
  StateId source;
  StateId target;
  std::vector<double> f;           // f[n] for n = 0..N, f[0] = 0
  std::vector<double> cumulative;  // running sums of f
  double defect = 0.0;             // truncation mass; entries are lower bounds when > 0
  double remaining = 0.0;          // explored mass that has not visited the target by time N

  std::size_t order() const noexcept { return f.size() - 1; }
  double total() const noexcept { return cumulative.back(); }
  TruncatedSeries as_series() const { return TruncatedSeries(f); }
};

/// Forward taboo recursion: mass is pushed one step at a time and whatever
/// lands on `y` is recorded and removed.
FirstReturnTable first_return_probs(const Kernel& k, StateId x, StateId y, std::size_t order,
                                    const TruncationPolicy& policy = {});

/// G(x,y|.) with c_n = p^(n)(x,y).
TruncatedSeries green_series(const Kernel& k, StateId x, StateId y, std::size_t order,
                             const TruncationPolicy& policy = {});

/// F = (G(x,y) - delta_xy) / G(y,y).
TruncatedSeries f_series_from_g(const TruncatedSeries& gxy, const TruncatedSeries& gyy, bool x_equals_y);

/// Closed form of F(0,0|z) for the chain built by paper_bd(p).
double closed_form_F00(double p, double z);

/// G(x,y|z) for real z through the resolvent (I - zP)^{-1} on the states
/// explored from x. Transitions leaving the explored region are killed, so
/// values are lower bounds that are exact when the region is complete.
class GreenResolvent {
 public:
  GreenResolvent(const Kernel& k, StateId x, std::size_t max_states);
  ~GreenResolvent();
  GreenResolvent(GreenResolvent&&) noexcept;
  GreenResolvent& operator=(GreenResolvent&&) noexcept;

  /// z in [0, 1); z = 1 is accepted only when mass is killed at the boundary.
  double operator()(StateId y, double z) const;
  bool complete() const noexcept;
  std::size_t region_size() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Probability of ever visiting y from x (F(x,y|1)) by an absorbing linear
/// solve over the states explored from x. Exact for complete regions,
/// a lower bound otherwise.
double hitting_probability(const Kernel& k, StateId x, StateId y, std::size_t max_states);

}  // namespace compact_markov
