#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <utility>
#include <vector>

namespace testsupport {

using Matrix = std::vector<std::vector<double>>;

// Gaussian elimination with partial pivoting; small dense systems only.
inline std::vector<double> dense_solve(Matrix a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(a[i][k]) > std::abs(a[p][k])) p = i;
    }
    std::swap(a[k], a[p]);
    std::swap(b[k], b[p]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a[k][j] * x[j];
    x[k] = s / a[k][k];
  }
  return x;
}

// P1 matrices on a uniform mesh, assembled element by element.
inline Matrix p1_stiffness(int cells, double length) {
  const double dx = length / cells;
  Matrix k(cells + 1, std::vector<double>(cells + 1, 0.0));
  for (int e = 0; e < cells; ++e) {
    k[e][e] += 1.0 / dx;
    k[e + 1][e + 1] += 1.0 / dx;
    k[e][e + 1] -= 1.0 / dx;
    k[e + 1][e] -= 1.0 / dx;
  }
  return k;
}

inline std::vector<double> p1_lumped_mass(int cells, double length) {
  const double dx = length / cells;
  std::vector<double> m(cells + 1, dx);
  m.front() = m.back() = 0.5 * dx;
  return m;
}

inline std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double lo = -1.0,
                                         double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testsupport
