#pragma once

// Independent reference computations used by the tests. None of these call
// into the library's series or passage code.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

inline Matrix identity(std::size_t n) {
  Matrix m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
  return m;
}

inline Matrix multiply(const Matrix& a, const Matrix& b) {
  const std::size_t n = a.size();
  Matrix c(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

// powers[n] = P^n for n = 0..max_n.
inline std::vector<Matrix> matrix_powers(const Matrix& p, std::size_t max_n) {
  std::vector<Matrix> out{identity(p.size())};
  for (std::size_t n = 1; n <= max_n; ++n) out.push_back(multiply(out.back(), p));
  return out;
}

// f^(n)(x,y) by summing the probability of every path x -> y of length n
// that avoids y at intermediate times.
inline double first_passage_by_paths(const Matrix& p, std::size_t x, std::size_t y, std::size_t n) {
  struct Walker {
    const Matrix& p;
    std::size_t y;
    std::size_t n;
    double sum = 0.0;
    void go(std::size_t state, std::size_t depth, double weight) {
      if (weight == 0.0) return;
      for (std::size_t next = 0; next < p.size(); ++next) {
        const double w = weight * p[state][next];
        if (w == 0.0) continue;
        if (depth + 1 == n) {
          if (next == y) sum += w;
        } else if (next != y) {
          go(next, depth + 1, w);
        }
      }
    }
  };
  if (n == 0) return 0.0;
  Walker walker{p, y, n};
  walker.go(x, 0, 1.0);
  return walker.sum;
}

inline double catalan(std::size_t n) {
  double c = 1.0;
  for (std::size_t k = 0; k < n; ++k) c = c * 2.0 * (2.0 * k + 1.0) / (k + 2.0);
  return c;
}

// Coefficient of z^m in 2pz^2/(1+sqrt(1-4z^2 p(1-p))): C_{n-1} p^n (1-p)^{n-1} at m = 2n.
inline double bd_first_return_coefficient(double p, std::size_t m) {
  if (m == 0 || m % 2 == 1) return 0.0;
  const std::size_t n = m / 2;
  return catalan(n - 1) * std::pow(p, static_cast<double>(n)) * std::pow(1.0 - p, static_cast<double>(n - 1));
}

// Dense random stochastic matrix; each entry is zeroed with probability `sparsity`.
inline Matrix random_stochastic(std::size_t n, std::mt19937_64& rng, double sparsity = 0.3) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix m(n, std::vector<double>(n, 0.0));
  for (auto& row : m) {
    double sum = 0.0;
    for (auto& v : row) {
      v = u(rng) < sparsity ? 0.0 : u(rng);
      sum += v;
    }
    if (sum == 0.0) {
      row[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)] = 1.0;
      continue;
    }
    for (auto& v : row) v /= sum;
  }
  return m;
}

// Irreducible variant: mixes in a cyclic permutation so every state reaches every other.
inline Matrix random_irreducible(std::size_t n, std::mt19937_64& rng) {
  Matrix m = random_stochastic(n, rng);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : m[i]) v *= 0.9;
    m[i][(i + 1) % n] += 0.1;
  }
  return m;
}

// Solves A v = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve(Matrix a, std::vector<double> b) {
  const std::size_t n = a.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> v(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * v[k];
    v[i] = s / a[i][i];
  }
  return v;
}

// Mean return time to x of a finite irreducible chain: 1 + sum_y p(x,y) h(y),
// where h solves the first-step equations with x absorbing.
inline double mean_return_time(const Matrix& p, std::size_t x) {
  const std::size_t n = p.size();
  Matrix a(n, std::vector<double>(n, 0.0));
  std::vector<double> b(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    a[i][i] = 1.0;
    if (i == x) {
      b[i] = 0.0;
      continue;
    }
    for (std::size_t j = 0; j < n; ++j)
      if (j != x) a[i][j] -= p[i][j];
  }
  const auto h = solve(a, b);
  double tau = 1.0;
  for (std::size_t j = 0; j < n; ++j) tau += p[x][j] * h[j];
  return tau;
}

}  // namespace oracle
