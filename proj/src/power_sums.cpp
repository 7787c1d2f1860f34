#include "latticelab/power_sums.hpp"

#include <cmath>

namespace latticelab {
namespace {

constexpr std::uint64_t kDirectLimit = 256;
constexpr std::uint64_t kHead = 32;

double direct_sum(double q, std::uint64_t first, std::uint64_t last) {
  // Summed from the small terms upward.
  double s = 0.0;
  for (std::uint64_t j = last; j >= first; --j) {
    s += q == 1.0 ? 1.0 / static_cast<double>(j) : std::pow(static_cast<double>(j), -q);
    if (j == first) break;
  }
  return s;
}

// Integral of t^(-q) over [m, M], M possibly infinite (then q > 1).
double integral(double q, double m, double M) {
  if (std::isinf(M)) return std::pow(m, 1.0 - q) / (q - 1.0);
  const double log_ratio = std::log(M / m);
  if (q == 1.0) return log_ratio;
  const double s = 1.0 - q;
  return std::pow(m, s) * std::expm1(s * log_ratio) / s;
}

// Odd derivatives of f(t) = t^(-q): f^(2k-1)(t) = -q(q+1)...(q+2k-2) t^(-q-2k+1).
double odd_derivative(double q, int order, double t) {
  if (std::isinf(t)) return 0.0;
  double coeff = -1.0;
  for (int i = 0; i < order; ++i) coeff *= (q + i);
  return coeff * std::pow(t, -q - order);
}

double euler_maclaurin(double q, std::uint64_t first, std::uint64_t last) {
  const double m = static_cast<double>(first);
  const double M = last == kInfiniteIndex ? INFINITY : static_cast<double>(last);
  const double fm = std::pow(m, -q);
  const double fM = std::isinf(M) ? 0.0 : std::pow(M, -q);
  double s = integral(q, m, M) + 0.5 * (fm + fM);
  s += (1.0 / 12.0) * (odd_derivative(q, 1, M) - odd_derivative(q, 1, m));
  s -= (1.0 / 720.0) * (odd_derivative(q, 3, M) - odd_derivative(q, 3, m));
  s += (1.0 / 30240.0) * (odd_derivative(q, 5, M) - odd_derivative(q, 5, m));
  return s;
}

}  // namespace

double power_sum(double q, std::uint64_t first, std::uint64_t last) {
  if (first == 0) first = 1;
  if (last < first) return 0.0;
  if (q == 0.0) {
    if (last == kInfiniteIndex) return INFINITY;
    return static_cast<double>(last - first + 1);
  }
  if (last == kInfiniteIndex && q <= 1.0) return INFINITY;
  if (last != kInfiniteIndex && last - first < kDirectLimit) return direct_sum(q, first, last);

  double head = 0.0;
  if (first < kHead) {
    head = direct_sum(q, first, kHead - 1);
    first = kHead;
  }
  return head + euler_maclaurin(q, first, last);
}

}  // namespace latticelab
