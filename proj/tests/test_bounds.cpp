#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "compact_markov/bounds.hpp"
#include "compact_markov/classify.hpp"
#include "compact_markov/errors.hpp"
#include "oracles.hpp"

using namespace compact_markov;

namespace {

std::vector<StateId> ids(std::initializer_list<std::size_t> xs) {
  std::vector<StateId> out;
  for (std::size_t x : xs) out.push_back(StateId{x});
  return out;
}

const BoundCheck& find_check(const std::vector<BoundCheck>& checks, const std::string& prefix) {
  for (const auto& c : checks)
    if (c.name.rfind(prefix, 0) == 0) return c;
  FAIL("missing check " << prefix);
  return checks.front();
}

}  // namespace

TEST_CASE("reversibility measure") {
  const auto s2 = compute_reversibility_measure(swap_chain());
  REQUIRE(s2);
  CHECK(s2->at(StateId{0}) == 1.0);
  CHECK(s2->at(StateId{1}) == 1.0);
  CHECK(s2->complete);

  TruncationPolicy policy;
  policy.max_states = 300;
  const auto bd = compute_reversibility_measure(paper_bd(0.7), policy);
  REQUIRE(bd);
  CHECK(bd->at(StateId{0}) == 1.0);
  CHECK(bd->at(StateId{1}) == doctest::Approx(1.0 / 0.7));
  for (std::size_t n = 1; n < 20; ++n) CHECK(bd->at(StateId{n + 1}) == doctest::Approx(bd->at(StateId{n}) * 0.3 / 0.7));
  CHECK(bd->max_residual <= 1e-9);

  CHECK_FALSE(compute_reversibility_measure(finite_chain({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}})));

  std::mt19937_64 rng(73);
  // Symmetric matrices are reversible with respect to the counting measure.
  for (int trial = 0; trial < 5; ++trial) {
    oracle::Matrix w(5, std::vector<double>(5, 0.0));
    std::uniform_real_distribution<double> u(0.1, 1.0);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = i; j < 5; ++j) w[i][j] = w[j][i] = u(rng);
    oracle::Matrix p = w;
    for (std::size_t i = 0; i < 5; ++i) {
      double sum = 0.0;
      for (double v : w[i]) sum += v;
      for (auto& v : p[i]) v /= sum;
    }
    const auto m = compute_reversibility_measure(finite_chain(p));
    REQUIRE(m);
    CHECK(m->max_residual <= 1e-9);
  }
}

TEST_CASE("return-time bounds") {
  const Kernel f = funnel(0.2, 50);
  const ReturnTimeBounds r = check_return_time_bounds(f, certify(f, ids({0}), 0.25));
  CHECK(r.all_pass());
  CHECK(r.terms[0].tau == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(r.reciprocal_sum == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(r.min_tau == doctest::Approx(1.25).epsilon(1e-12));

  const ReturnTimeBounds edge = check_return_time_bounds(f, certify(f, ids({0}), 0.2 + 1e-9));
  CHECK(edge.all_pass());
  CHECK(edge.reciprocal_sum == doctest::Approx(0.8).epsilon(1e-12));

  const Kernel s2 = swap_chain();
  const ReturnTimeBounds swap = check_return_time_bounds(s2, certify(s2, ids({0, 1}), 0.5));
  CHECK(swap.all_pass());
  CHECK(swap.reciprocal_sum == doctest::Approx(1.0));
  CHECK(swap.min_tau == doctest::Approx(2.0));
}

TEST_CASE("hitting-time distribution examples") {
  const Kernel f = funnel(0.2, 50);
  for (std::size_t x : {0u, 7u, 50u}) {
    const HittingTimeDistribution d = hitting_time_distribution(f, ids({0}), StateId{x}, 40);
    for (std::size_t n = 1; n <= 40; ++n) {
      CHECK(d.pmf[n - 1] == doctest::Approx(0.8 * std::pow(0.2, n - 1.0)).epsilon(1e-12));
      CHECK(d.survival_at(n) == doctest::Approx(std::pow(0.2, n - 1.0)).epsilon(1e-12));
    }
    const auto checks = check_hitting_bounds(d, 0.2);
    for (const auto& c : checks) CHECK(c.status == CheckStatus::Pass);
    CHECK(find_check(checks, "expected_hitting_time").lhs == doctest::Approx(1.25).epsilon(1e-9));
    CHECK(d.expectation_lower() == doctest::Approx(1.25).epsilon(1e-9));
  }

  const HittingTimeDistribution s2 = hitting_time_distribution(swap_chain(), ids({1}), StateId{0}, 5);
  CHECK(s2.pmf[0] == 1.0);
  CHECK(s2.expectation_lower() == 1.0);

  const HittingTimeDistribution bd = hitting_time_distribution(paper_bd(0.7), ids({0}), StateId{1}, 2000);
  CHECK(bd.pmf[0] == doctest::Approx(0.7));
  CHECK(bd.partial_expectation() == doctest::Approx(2.5).epsilon(1e-9));
}

TEST_CASE("hitting-time distribution mass balance") {
  std::mt19937_64 rng(79);
  for (int trial = 0; trial < 20; ++trial) {
    const Kernel k = finite_chain(oracle::random_irreducible(6, rng));
    const HittingTimeDistribution d = hitting_time_distribution(k, ids({0, 3}), StateId{5}, 30);
    double sum = d.tail;
    for (double p : d.pmf) {
      CHECK(p >= 0.0);
      sum += p;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK_THROWS_AS(hitting_time_distribution(swap_chain(), {}, StateId{0}, 3), DomainError);
}

TEST_CASE("hitting bounds hold on certified random chains") {
  std::mt19937_64 rng(83);
  std::size_t exercised = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t size = 3 + trial % 5;
    const Kernel k = finite_chain(oracle::random_irreducible(size, rng));
    const TightSetSearch search = find_tight_set(k, 0.4);
    if (!search.certificate) continue;
    ++exercised;
    CHECK(check_return_time_bounds(k, *search.certificate).all_pass());
    for (std::size_t x = 0; x < size; ++x) {
      const auto d = hitting_time_distribution(k, search.certificate->set, StateId{x}, 60);
      for (const auto& c : check_hitting_bounds(d, *search.certificate)) CHECK(c.status == CheckStatus::Pass);
    }
  }
  CHECK(exercised > 10);
}

TEST_CASE("reversible lower bound examples") {
  const auto s2m = compute_reversibility_measure(swap_chain());
  const ReturnLowerBound s2 = reversible_lower_bound(swap_chain(), *s2m, ids({0, 1}), StateId{0}, 1);
  CHECK(s2.tail == 0.0);
  CHECK(s2.rhs == doctest::Approx(0.5));
  CHECK(s2.lhs == 1.0);
  CHECK(s2.pass);

  const auto lm = compute_reversibility_measure(lazy_chain(0.5));
  const ReturnLowerBound lazy = reversible_lower_bound(lazy_chain(0.5), *lm, ids({0}), StateId{0}, 1);
  CHECK(lazy.tail == doctest::Approx(0.5));
  CHECK(lazy.rhs == doctest::Approx(0.25));
  CHECK(lazy.lhs == doctest::Approx(0.5));
  CHECK(lazy.pass);

  const Kernel bd = paper_bd_truncated(0.7, 200);
  const auto bm = compute_reversibility_measure(bd);
  REQUIRE(bm);
  const auto rows = n_step_rows(bd, StateId{0}, 50);
  for (std::size_t n = 1; n <= 25; ++n) CHECK(reversible_lower_bound(rows, *bm, ids({0, 1, 2}), StateId{0}, n).pass);
}

TEST_CASE("green lower bound examples") {
  const auto s2m = compute_reversibility_measure(swap_chain());
  const GreenBoundCheck s2 = green_lower_bound(swap_chain(), *s2m, ids({0, 1}), StateId{0}, 0.5);
  CHECK(s2.epsilon == 0.0);
  CHECK(s2.lhs == doctest::Approx(1.0 / 0.75));
  CHECK(s2.rhs == doctest::Approx(0.5 / 0.75));
  CHECK(s2.status == CheckStatus::Pass);

  const auto lm = compute_reversibility_measure(lazy_chain(0.5));
  const GreenBoundCheck lazy = green_lower_bound(lazy_chain(0.5), *lm, ids({0, 1}), StateId{0}, 0.9);
  CHECK(lazy.lhs == doctest::Approx(5.5).epsilon(1e-9));
  CHECK(lazy.rhs == doctest::Approx(0.5 / 0.19));
  CHECK(lazy.status == CheckStatus::Pass);

  const GreenBoundCheck zero = green_lower_bound(lazy_chain(0.5), *lm, ids({0}), StateId{0}, 0.0);
  CHECK(zero.lhs == 1.0);
  CHECK(zero.rhs <= 1.0);
  CHECK(zero.status == CheckStatus::Pass);

  CHECK_THROWS(green_lower_bound(lazy_chain(0.5), *lm, ids({1}), StateId{0}, 0.5));
}

TEST_CASE("m tau proportionality") {
  for (const Kernel& k : {swap_chain(), lazy_chain(0.5), lazy_chain(0.2)}) {
    const auto m = compute_reversibility_measure(k);
    const ProportionalityReport r = check_m_tau_proportionality(k, *m);
    CHECK(r.pass);
    CHECK(r.products[0] == doctest::Approx(2.0));
  }
  const Kernel bd = paper_bd_truncated(0.7, 100);
  const auto m = compute_reversibility_measure(bd);
  const ProportionalityReport r = check_m_tau_proportionality(bd, *m);
  CHECK(r.pass);
  CHECK(r.ratio <= 1.0 + 1e-4);
}
