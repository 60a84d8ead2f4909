#include "compact_markov/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <thread>

#include "compact_markov/errors.hpp"

namespace compact_markov {

namespace {

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;
constexpr double kZ95 = 1.959963984540054;

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Runs body(trial) for every trial, spreading contiguous chunks over threads.
// Results are written by trial index, so the outcome does not depend on scheduling.
void for_each_trial(std::size_t trials, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 16);
  if (workers == 1 || trials < 1024) {
    for (std::size_t t = 0; t < trials; ++t) body(t);
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (trials + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(trials, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] {
      for (std::size_t t = begin; t < end; ++t) body(t);
    });
  }
}

EstimateWithCI mean_with_ci(const std::vector<double>& samples) {
  EstimateWithCI est;
  est.trials = samples.size();
  if (samples.empty()) return est;
  double sum = 0.0;
  for (double s : samples) sum += s;
  est.mean = sum / static_cast<double>(samples.size());
  if (samples.size() < 2) return est;
  double sq = 0.0;
  for (double s : samples) sq += (s - est.mean) * (s - est.mean);
  const double var = sq / static_cast<double>(samples.size() - 1);
  est.half_width = kZ95 * std::sqrt(var / static_cast<double>(samples.size()));
  return est;
}

// First n in 1..cap with Z_n in `hit`, or 0 when censored.
std::size_t first_entrance(const Kernel& k, StateId start, const std::function<bool(StateId)>& hit, std::size_t cap,
                           CounterRng& rng) {
  StateId state = start;
  for (std::size_t n = 1; n <= cap; ++n) {
    state = sample_transition(k.row(state), rng.uniform());
    if (hit(state)) return n;
  }
  return 0;
}

}  // namespace

std::uint64_t CounterRng::next() noexcept {
  ++counter_;
  return mix64(seed_ + counter_ * kGoldenGamma);
}

std::uint64_t CounterRng::derive(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(seed ^ mix64(index + kGoldenGamma));
}

StateId sample_transition(const RowDistribution& row, double u) {
  if (row.empty()) throw DomainError("cannot sample from an empty row");
  double cumulative = 0.0;
  for (const auto& t : row) {
    cumulative += t.weight;
    if (u < cumulative) return t.to;
  }
  return row.back().to;
}

Path simulate_path(const Kernel& k, StateId x0, std::size_t steps, std::uint64_t seed) {
  if (!k.contains(x0)) throw DomainError("start state is not a state of " + k.info().label());
  Path path{{x0}, seed, k.info().label()};
  path.states.reserve(steps + 1);
  CounterRng rng(seed);
  for (std::size_t i = 0; i < steps; ++i) path.states.push_back(sample_transition(k.row(path.states.back()), rng.uniform()));
  return path;
}

ReturnTimeEstimate estimate_return_time(const Kernel& k, StateId x, std::size_t trials, std::size_t cap,
                                        std::uint64_t seed) {
  if (trials < 1 || cap < 1) throw DomainError("estimate_return_time needs trials >= 1 and cap >= 1");
  if (!k.contains(x)) throw DomainError("state is not a state of " + k.info().label());
  std::vector<std::size_t> outcome(trials, 0);
  const auto hit = [x](StateId s) { return s == x; };
  for_each_trial(trials, [&](std::size_t t) {
    CounterRng rng(CounterRng::derive(seed, t));
    outcome[t] = first_entrance(k, x, hit, cap, rng);
  });
  ReturnTimeEstimate result;
  std::vector<double> samples;
  samples.reserve(trials);
  for (std::size_t v : outcome) {
    if (v == 0) {
      ++result.censored_count;
    } else {
      samples.push_back(static_cast<double>(v));
    }
  }
  result.estimate = mean_with_ci(samples);
  return result;
}

EstimateWithCI occupation_fraction(const Kernel& k, std::span<const StateId> set, StateId x0, std::size_t steps,
                                   std::uint64_t seed) {
  if (steps < 1) throw DomainError("occupation_fraction needs steps >= 1");
  if (!k.contains(x0)) throw DomainError("start state is not a state of " + k.info().label());
  const std::set<StateId> members(set.begin(), set.end());
  const std::size_t batches = std::min<std::size_t>(50, steps);
  std::vector<double> batch_means;
  CounterRng rng(seed);
  StateId state = x0;
  std::size_t total_hits = 0;
  std::size_t step = 0;
  for (std::size_t b = 0; b < batches; ++b) {
    const std::size_t end = (b + 1) * steps / batches;
    const std::size_t length = end - step;
    std::size_t hits = 0;
    for (; step < end; ++step) {
      state = sample_transition(k.row(state), rng.uniform());
      if (members.contains(state)) ++hits;
    }
    total_hits += hits;
    batch_means.push_back(static_cast<double>(hits) / static_cast<double>(length));
  }
  EstimateWithCI est = mean_with_ci(batch_means);
  est.mean = static_cast<double>(total_hits) / static_cast<double>(steps);
  est.trials = steps;
  return est;
}

std::vector<std::pair<std::size_t, double>> occupation_trace(const Kernel& k, std::span<const StateId> set, StateId x0,
                                                             std::size_t steps, std::size_t stride, std::uint64_t seed) {
  if (stride < 1) throw DomainError("occupation_trace needs stride >= 1");
  const std::set<StateId> members(set.begin(), set.end());
  std::vector<std::pair<std::size_t, double>> trace;
  CounterRng rng(seed);
  StateId state = x0;
  std::size_t hits = 0;
  for (std::size_t i = 1; i <= steps; ++i) {
    state = sample_transition(k.row(state), rng.uniform());
    if (members.contains(state)) ++hits;
    if (i % stride == 0 || i == steps) trace.emplace_back(i, static_cast<double>(hits) / static_cast<double>(i));
  }
  return trace;
}

SurvivalCurve hitting_time_samples(const Kernel& k, std::span<const StateId> set, StateId x0, std::size_t trials,
                                   std::size_t cap, std::uint64_t seed, const std::optional<TightnessCertificate>& cert) {
  if (trials < 1 || cap < 1) throw DomainError("hitting_time_samples needs trials >= 1 and cap >= 1");
  if (set.empty()) throw DomainError("target set A must be non-empty");
  if (!k.contains(x0)) throw DomainError("start state is not a state of " + k.info().label());
  const std::set<StateId> members(set.begin(), set.end());
  const auto hit = [&members](StateId s) { return members.contains(s); };
  std::vector<std::size_t> outcome(trials, 0);
  for_each_trial(trials, [&](std::size_t t) {
    CounterRng rng(CounterRng::derive(seed, t));
    outcome[t] = first_entrance(k, x0, hit, cap, rng);
  });

  SurvivalCurve curve;
  curve.trials = trials;
  // at_least[n] counts trials with T_A >= n; censored trials count for every n <= cap.
  std::vector<std::size_t> at_least(cap + 2, 0);
  std::vector<double> samples;
  for (std::size_t v : outcome) {
    if (v == 0) {
      ++curve.censored_count;
      at_least[cap + 1] += 1;
    } else {
      at_least[v] += 1;
      samples.push_back(static_cast<double>(v));
    }
  }
  for (std::size_t n = cap; n >= 1; --n) at_least[n] += at_least[n + 1];
  curve.survival.resize(cap);
  for (std::size_t n = 1; n <= cap; ++n) {
    curve.survival[n - 1] = static_cast<double>(at_least[n]) / static_cast<double>(trials);
  }
  curve.mean = mean_with_ci(samples);

  if (cert) {
    if (std::set<StateId>(cert->set.begin(), cert->set.end()) != members) {
      throw PreconditionError("certificate set differs from the hitting target");
    }
    std::vector<std::size_t> violations;
    for (std::size_t n = 1; n <= cap; ++n) {
      const double q = std::min(1.0, std::pow(cert->epsilon, static_cast<double>(n - 1)));
      const double sigma = std::sqrt(q * (1.0 - q) / static_cast<double>(trials));
      if (curve.survival[n - 1] > q + 3.0 * sigma) violations.push_back(n);
    }
    curve.violations = std::move(violations);
  }
  return curve;
}

}  // namespace compact_markov
