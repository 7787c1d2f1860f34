#pragma once

// Independent reference computations. Nothing here calls into the library
// beyond reading raw numbers, so agreement is evidence rather than tautology.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace oracle {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Matrix = std::vector<std::vector<double>>;

inline double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline Matrix matrix_of(const std::vector<std::vector<double>>& pts) {
  Matrix m(pts.size(), std::vector<double>(pts.size(), 0.0));
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j) m[i][j] = pts[i].size() == 1 ? std::fabs(pts[i][0] - pts[j][0]) : euclid(pts[i], pts[j]);
  return m;
}

inline std::vector<double> isolation_radii(const Matrix& d) {
  std::vector<double> r(d.size(), kInf);
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d.size(); ++j)
      if (i != j) r[i] = std::min(r[i], d[i][j]);
  return r;
}

inline double delta(const Matrix& d) {
  const auto r = isolation_radii(d);
  return r.empty() ? kInf : *std::min_element(r.begin(), r.end());
}

/// Closest pair (i < j) outside `excluded`, by exhaustive scan.
inline std::optional<std::pair<std::size_t, std::size_t>> closest_pair_outside(const Matrix& d, const std::vector<char>& excluded) {
  std::optional<std::pair<std::size_t, std::size_t>> best;
  double bd = kInf;
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = i + 1; j < d.size(); ++j)
      if (!excluded[i] && !excluded[j] && d[i][j] < bd) bd = d[i][j], best = {i, j};
  return best;
}

inline std::vector<double> inf_convolution(const std::vector<double>& g, const Matrix& d, double n) {
  std::vector<double> out(g.size(), kInf);
  for (std::size_t x = 0; x < g.size(); ++x)
    for (std::size_t y = 0; y < g.size(); ++y) out[x] = std::min(out[x], g[y] + n * d[x][y]);
  return out;
}

inline double lipschitz(const std::vector<double>& f, const Matrix& d) {
  double best = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x)
    for (std::size_t y = 0; y < f.size(); ++y)
      if (x != y) best = std::max(best, std::fabs(f[x] - f[y]) / d[x][y]);
  return best;
}

/// sup over t in [0, 1] of sqrt(t) - n t: dense grid, then ternary refinement
/// around the best grid point (the function is concave).
inline double sqrt_alpha(double n) {
  constexpr int kGrid = 200000;
  int best = 0;
  double bv = -kInf;
  for (int i = 0; i <= kGrid; ++i) {
    const double t = static_cast<double>(i) / kGrid;
    const double v = std::sqrt(t) - n * t;
    if (v > bv) bv = v, best = i;
  }
  double lo = std::max(0, best - 1) / static_cast<double>(kGrid), hi = std::min(kGrid, best + 1) / static_cast<double>(kGrid);
  for (int it = 0; it < 200; ++it) {
    const double a = lo + (hi - lo) / 3, b = hi - (hi - lo) / 3;
    if (std::sqrt(a) - n * a < std::sqrt(b) - n * b) lo = a;
    else hi = b;
  }
  const double t = 0.5 * (lo + hi);
  return std::max({0.0, bv, std::sqrt(t) - n * t});
}

/// Harmonic number H_n: direct Kahan sum for small n, asymptotic series otherwise.
inline long double harmonic(std::uint64_t n) {
  if (n == 0) return 0.0L;
  if (n <= 2000000) {
    long double s = 0.0L;
    for (std::uint64_t j = n; j >= 1; --j) s += 1.0L / static_cast<long double>(j);
    return s;
  }
  const long double x = static_cast<long double>(n);
  const long double gamma = 0.577215664901532860606512090082402431L;
  return std::log(x) + gamma + 1.0L / (2 * x) - 1.0L / (12 * x * x) + 1.0L / (120 * x * x * x * x);
}

/// sum_{j=k}^{l-1} j^(-q); q = 1 uses harmonic numbers, otherwise direct summation.
inline long double power_block(double q, std::uint64_t k, std::uint64_t l) {
  if (q == 1.0) return harmonic(l - 1) - harmonic(k - 1);
  long double s = 0.0L;
  for (std::uint64_t j = l - 1; j >= k; --j) s += std::pow(static_cast<long double>(j), -static_cast<long double>(q));
  return s;
}

/// Step family x_n(k) = h for k <= n, else 0.
inline double step_value(double h, std::uint64_t n, std::uint64_t k) { return k <= n ? h : 0.0; }

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a, sy += b, sxx += a * a, sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracle
