#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "compact_markov/bounds.hpp"
#include "compact_markov/classify.hpp"
#include "compact_markov/montecarlo.hpp"
#include "oracles.hpp"

using namespace compact_markov;

namespace {

std::vector<StateId> ids(std::initializer_list<std::size_t> xs) {
  std::vector<StateId> out;
  for (std::size_t x : xs) out.push_back(StateId{x});
  return out;
}

bool within(const EstimateWithCI& e, double truth, double sigmas = 3.0) {
  return std::abs(e.mean - truth) <= sigmas * e.std_error();
}

}  // namespace

TEST_CASE("rng is deterministic and uniform-looking") {
  CounterRng a(42);
  CounterRng b(42);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / 100000.0 == doctest::Approx(0.5).epsilon(0.01));
  CHECK(CounterRng::derive(1, 0) != CounterRng::derive(1, 1));
  CHECK(CounterRng::derive(1, 0) != CounterRng::derive(2, 0));
}

TEST_CASE("sample_transition uses the row order") {
  const RowDistribution row{{StateId{4}, 0.25}, {StateId{2}, 0.75}};
  CHECK(sample_transition(row, 0.0) == StateId{4});
  CHECK(sample_transition(row, 0.2499) == StateId{4});
  CHECK(sample_transition(row, 0.25) == StateId{2});
  CHECK(sample_transition(row, 0.9999999) == StateId{2});
}

TEST_CASE("simulate_path") {
  const Path p = simulate_path(swap_chain(), StateId{0}, 4, 99);
  CHECK(p.states == ids({0, 1, 0, 1, 0}));
  const Kernel f = funnel(0.2, 50);
  const Path a = simulate_path(f, StateId{0}, 1000, 5);
  const Path b = simulate_path(f, StateId{0}, 1000, 5);
  CHECK(a.states == b.states);
  for (std::size_t i = 1; i < a.states.size(); ++i) {
    bool allowed = false;
    for (const auto& t : f.row(a.states[i - 1])) allowed = allowed || (t.to == a.states[i] && t.weight > 0.0);
    CHECK(allowed);
  }
  const Path long_path = simulate_path(f, StateId{0}, 100000, 6);
  std::size_t zeros = 0;
  for (std::size_t i = 1; i < long_path.states.size(); ++i) zeros += long_path.states[i] == StateId{0} ? 1 : 0;
  const double frac = static_cast<double>(zeros) / 1e5;
  CHECK(std::abs(frac - 0.8) <= 3.0 * std::sqrt(0.8 * 0.2 / 1e5));
}

TEST_CASE("estimate_return_time") {
  const ReturnTimeEstimate s2 = estimate_return_time(swap_chain(), StateId{0}, 100, 10, 1);
  CHECK(s2.estimate.mean == 2.0);
  CHECK(s2.estimate.half_width == 0.0);
  CHECK(s2.censored_count == 0);

  const ReturnTimeEstimate f = estimate_return_time(funnel(0.2, 50), StateId{0}, 20000, 1000, 2);
  CHECK(within(f.estimate, 1.25));

  const ReturnTimeEstimate transient = estimate_return_time(paper_bd(0.25), StateId{0}, 2000, 50, 3);
  CHECK(transient.censored_count > 0);
  CHECK(transient.censored_count + transient.estimate.trials == 2000);
}

TEST_CASE("occupation_fraction") {
  const EstimateWithCI s2 = occupation_fraction(swap_chain(), ids({0}), StateId{0}, 1000000, 1);
  CHECK(s2.mean == 0.5);
  const EstimateWithCI f = occupation_fraction(funnel(0.2, 50), ids({0}), StateId{0}, 1000000, 2);
  CHECK(f.mean >= 0.8 - 3.0 * f.std_error());
  const EstimateWithCI bd = occupation_fraction(paper_bd(0.7), ids({0}), StateId{0}, 1000000, 3);
  CHECK(within(bd, 1.0 / 3.5));
  const auto trace = occupation_trace(funnel(0.2, 50), ids({0}), StateId{0}, 1000, 100, 2);
  CHECK(trace.size() == 10);
  CHECK(trace.back().first == 1000);
}

TEST_CASE("hitting_time_samples") {
  const Kernel f = funnel(0.2, 50);
  const SurvivalCurve curve = hitting_time_samples(f, ids({0}), StateId{5}, 20000, 100, 7, certify(f, ids({0}), 0.25));
  CHECK(curve.survival[0] == 1.0);
  const double sigma = std::sqrt(0.2 * 0.8 / 20000.0);
  CHECK(std::abs(curve.survival[1] - 0.2) <= 3.0 * sigma);
  REQUIRE(curve.violations);
  CHECK(curve.violations->empty());

  const SurvivalCurve s2 = hitting_time_samples(swap_chain(), ids({1}), StateId{0}, 100, 10, 1);
  CHECK(s2.survival[1] == 0.0);

  const Kernel k = finite_chain({{0.1, 0.6, 0.3}, {0.5, 0.2, 0.3}, {0.3, 0.3, 0.4}});
  const auto exact = hitting_time_distribution(k, ids({2}), StateId{0}, 500);
  const SurvivalCurve mc = hitting_time_samples(k, ids({2}), StateId{0}, 20000, 500, 11);
  CHECK(within(mc.mean, exact.partial_expectation()));
}

TEST_CASE("results are bit-identical for identical inputs") {
  const Kernel bd = paper_bd(0.7);
  const auto a = estimate_return_time(bd, StateId{0}, 5000, 1000, 9);
  const auto b = estimate_return_time(bd, StateId{0}, 5000, 1000, 9);
  CHECK(a.estimate.mean == b.estimate.mean);
  CHECK(a.estimate.half_width == b.estimate.half_width);
  const auto c = hitting_time_samples(bd, ids({0}), StateId{3}, 3000, 500, 4);
  const auto d = hitting_time_samples(bd, ids({0}), StateId{3}, 3000, 500, 4);
  CHECK(c.survival == d.survival);
  CHECK(occupation_fraction(bd, ids({0}), StateId{0}, 10000, 8).mean == occupation_fraction(bd, ids({0}), StateId{0}, 10000, 8).mean);
}

TEST_CASE("Monte Carlo agrees with exact values across 100 seeds") {
  std::mt19937_64 rng(89);
  const auto m = oracle::random_irreducible(5, rng);
  const Kernel k = finite_chain(m);
  const double tau = mean_return_time_exact(k, StateId{1});
  const auto dist = hitting_time_distribution(k, ids({0}), StateId{4}, 2000);
  int return_hits = 0;
  int hitting_hits = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    if (within(estimate_return_time(k, StateId{1}, 2000, 100000, seed).estimate, tau)) ++return_hits;
    if (within(hitting_time_samples(k, ids({0}), StateId{4}, 2000, 2000, seed + 1000).mean, dist.partial_expectation())) ++hitting_hits;
  }
  MESSAGE("return time within 3 sigma: " << return_hits << "/100, hitting time: " << hitting_hits << "/100");
  CHECK(return_hits >= 99);
  CHECK(hitting_hits >= 99);
}
