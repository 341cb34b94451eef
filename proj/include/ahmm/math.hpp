#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace ahmm {

inline constexpr double NEG_INF = -std::numeric_limits<double>::infinity();

inline double log_sum_exp(double a, double b) {
  if (a == NEG_INF) return b;
  if (b == NEG_INF) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

inline double log_sum_exp(std::span<const double> xs) {
  double m = NEG_INF;
  for (double x : xs) m = std::max(m, x);
  if (m == NEG_INF) return NEG_INF;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - m);
  return m + std::log(acc);
}

// log C(n, k) for integer 0 <= k <= n; -inf outside that range (n >= 0).
inline double log_binomial(long n, long k) {
  if (k < 0 || k > n || n < 0) return NEG_INF;
  if (k == 0 || k == n) return 0.0;
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

// log(1 - e^{-x}) for x > 0, stable near both ends.
inline double log1mexp(double x) {
  if (x <= 0.0) return NEG_INF;
  static const double ln2 = std::log(2.0);
  return x > ln2 ? std::log1p(-std::exp(-x)) : std::log(-std::expm1(-x));
}

// Riemann zeta for s > 1 via Euler-Maclaurin with a 64-term head.
// Absolute error well below 1e-12 over s in [1.0001, 60].
inline double riemann_zeta(double s) {
  if (!(s > 1.0)) throw std::domain_error("riemann_zeta: requires s > 1");
  constexpr int N = 64;
  double head = 0.0;
  for (int n = 1; n <= N; ++n) head += std::pow(static_cast<double>(n), -s);
  const double Nd = N;
  const double tail = std::pow(Nd, 1.0 - s) / (s - 1.0) - 0.5 * std::pow(Nd, -s) +
                      s / 12.0 * std::pow(Nd, -s - 1.0) -
                      s * (s + 1.0) * (s + 2.0) / 720.0 * std::pow(Nd, -s - 3.0) +
                      s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) / 30240.0 *
                          std::pow(Nd, -s - 5.0);
  return head + tail;
}

// pmf loops evaluate zeta at one fixed exponent; a single-slot memo per
// thread removes the dominant recomputation cost.
inline double riemann_zeta_cached(double s) {
  thread_local double last_s = 0.0;
  thread_local double last_v = 0.0;
  if (s != last_s) {
    last_v = riemann_zeta(s);
    last_s = s;
  }
  return last_v;
}

inline double mean(std::span<const double> xs) {
  double acc = 0.0;
  for (double x : xs) acc += x;
  return acc / static_cast<double>(xs.size());
}

// Quantile with linear interpolation between order statistics (R type 7).
// q outside [0,1] is clamped.
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  q = std::clamp(q, 0.0, 1.0);
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

inline double quantile(std::vector<double> xs, double q) {
  std::sort(xs.begin(), xs.end());
  return quantile_sorted(xs, q);
}

}  // namespace ahmm
