#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "compact_markov/errors.hpp"
#include "compact_markov/passage.hpp"
#include "oracles.hpp"

using namespace compact_markov;

TEST_CASE("first_return_probs examples") {
  const FirstReturnTable s2 = first_return_probs(swap_chain(), StateId{0}, StateId{0}, 10);
  CHECK(s2.f[0] == 0.0);
  CHECK(s2.f[1] == 0.0);
  CHECK(s2.f[2] == 1.0);
  for (std::size_t n = 3; n <= 10; ++n) CHECK(s2.f[n] == 0.0);

  const FirstReturnTable bd = first_return_probs(paper_bd(0.7), StateId{0}, StateId{0}, 6);
  CHECK(bd.f[2] == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(bd.f[4] == doctest::Approx(0.147).epsilon(1e-14));
  CHECK(bd.f[6] == doctest::Approx(0.06174).epsilon(1e-14));
  CHECK(bd.f[3] == 0.0);

  const FirstReturnTable lazy = first_return_probs(lazy_chain(0.5), StateId{0}, StateId{0}, 20);
  for (std::size_t n = 1; n <= 20; ++n) CHECK(lazy.f[n] == doctest::Approx(std::ldexp(1.0, -static_cast<int>(n))));
}

TEST_CASE("first_return_probs table invariants") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const Kernel k = finite_chain(oracle::random_stochastic(5, rng));
    const FirstReturnTable t = first_return_probs(k, StateId{0}, StateId{static_cast<std::size_t>(trial % 5)}, 60);
    for (std::size_t n = 0; n <= 60; ++n) {
      CHECK(t.f[n] >= 0.0);
      CHECK(t.f[n] <= 1.0);
      if (n > 0) CHECK(t.cumulative[n] >= t.cumulative[n - 1]);
    }
    CHECK(t.total() <= 1.0 + 1e-9);
    CHECK(t.defect == 0.0);
  }
}

TEST_CASE("taboo recursion equals path enumeration") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t size = 2 + trial % 5;
    const auto m = oracle::random_stochastic(size, rng);
    const Kernel k = finite_chain(m);
    for (std::size_t x = 0; x < size; ++x) {
      for (std::size_t y = 0; y < size; ++y) {
        const FirstReturnTable t = first_return_probs(k, StateId{x}, StateId{y}, 8);
        for (std::size_t n = 1; n <= 8; ++n) CHECK(std::abs(t.f[n] - oracle::first_passage_by_paths(m, x, y, n)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("green_series examples") {
  const TruncatedSeries s2 = green_series(swap_chain(), StateId{0}, StateId{0}, 8);
  for (std::size_t n = 0; n <= 8; ++n) CHECK(s2[n] == (n % 2 == 0 ? 1.0 : 0.0));
  const TruncatedSeries bd = green_series(paper_bd(0.7), StateId{0}, StateId{0}, 4);
  CHECK(bd[0] == 1.0);
  CHECK(bd[1] == 0.0);
  CHECK(bd[2] == doctest::Approx(0.7));
  CHECK(green_series(paper_bd(0.7), StateId{0}, StateId{3}, 4)[0] == 0.0);
}

TEST_CASE("f_series_from_g") {
  std::vector<double> g(11, 0.0);
  for (std::size_t n = 0; n <= 10; n += 2) g[n] = 1.0;
  const TruncatedSeries f = f_series_from_g(TruncatedSeries(g), TruncatedSeries(g), true);
  for (std::size_t n = 0; n <= 10; ++n) CHECK(std::abs(f[n] - (n == 2 ? 1.0 : 0.0)) <= 1e-15);

  const TruncatedSeries none = f_series_from_g(TruncatedSeries::zero(10), TruncatedSeries(g), false);
  for (std::size_t n = 0; n <= 10; ++n) CHECK(none[n] == 0.0);

  CHECK_THROWS(f_series_from_g(TruncatedSeries(g), TruncatedSeries({0.5, 0.5}), true));

  const Kernel bd = paper_bd(0.7);
  const TruncatedSeries g00 = green_series(bd, StateId{0}, StateId{0}, 200);
  const TruncatedSeries via_g = f_series_from_g(g00, g00, true);
  const FirstReturnTable direct = first_return_probs(bd, StateId{0}, StateId{0}, 200);
  for (std::size_t n = 0; n <= 200; ++n) CHECK(std::abs(via_g[n] - direct.f[n]) <= 1e-10);
}

TEST_CASE("convolution identity on random chains") {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 15; ++trial) {
    const std::size_t size = 2 + trial % 6;
    const auto m = oracle::random_stochastic(size, rng);
    const Kernel k = finite_chain(m);
    const auto powers = oracle::matrix_powers(m, 30);
    const std::size_t x = 0;
    const std::size_t y = size - 1;
    const FirstReturnTable f = first_return_probs(k, StateId{x}, StateId{y}, 30);
    for (std::size_t n = 1; n <= 30; ++n) {
      double conv = 0.0;
      for (std::size_t j = 1; j <= n; ++j) conv += f.f[j] * powers[n - j][y][y];
      CHECK(std::abs(conv - powers[n][x][y]) <= 1e-10);
    }
  }
}

TEST_CASE("closed form of the example chain") {
  CHECK(closed_form_F00(0.25, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(closed_form_F00(0.5, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(closed_form_F00(0.7, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(closed_form_F00(0.3, 0.0) == 0.0);
  // Coefficients of F from G match the Catalan expansion.
  for (double p : {0.25, 0.5, 0.7}) {
    const TruncatedSeries g = green_series(paper_bd(p), StateId{0}, StateId{0}, 200);
    const TruncatedSeries f = f_series_from_g(g, g, true);
    for (std::size_t n = 0; n <= 200; ++n) CHECK(std::abs(f[n] - oracle::bd_first_return_coefficient(p, n)) <= 1e-9);
    // And the truncated series approaches the closed form from below.
    CHECK(series_eval(f, 0.6) == doctest::Approx(closed_form_F00(p, 0.6)).epsilon(1e-12));
  }
}

TEST_CASE("GreenResolvent agrees with the series inside the disc") {
  const Kernel bd = paper_bd_truncated(0.7, 40);
  const GreenResolvent resolvent(bd, StateId{0}, 100);
  CHECK(resolvent.complete());
  CHECK(resolvent.region_size() == 40);
  const TruncatedSeries g = green_series(bd, StateId{0}, StateId{3}, 400);
  CHECK(resolvent(StateId{3}, 0.8) == doctest::Approx(series_eval(g, 0.8)).epsilon(1e-10));
  const GreenResolvent s2(swap_chain(), StateId{0}, 10);
  CHECK(s2(StateId{0}, 0.5) == doctest::Approx(1.0 / 0.75));
}

TEST_CASE("hitting_probability") {
  CHECK(hitting_probability(paper_bd(0.25), StateId{0}, StateId{0}, 2000) == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
  CHECK(hitting_probability(funnel(0.2, 10), StateId{3}, StateId{7}, 100) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(hitting_probability(swap_chain(), StateId{0}, StateId{0}, 10) == doctest::Approx(1.0));
  // From 1, BD(p) with p > 1/2 hits 0 surely.
  CHECK(hitting_probability(paper_bd(0.7), StateId{1}, StateId{0}, 5000) == doctest::Approx(1.0).epsilon(1e-9));
}
