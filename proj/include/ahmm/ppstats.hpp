#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ahmm/math.hpp"
#include "ahmm/parallel.hpp"
#include "ahmm/rng.hpp"
#include "ahmm/series.hpp"

namespace ahmm {

struct RipleyCurve {
  std::vector<double> h;
  std::vector<double> k_hat;
  std::vector<double> reference;  // 2h (complete randomness in 1-D)
  std::vector<double> ci_lo;      // empty when no band was requested
  std::vector<double> ci_hi;
  bool corrected = false;
};

namespace detail {

// Sorted pair contributions allow one O(P log P) pass for the whole h grid.
struct PairContrib {
  double r;
  double value;
};

inline RipleyCurve sweep_pairs(std::vector<PairContrib> pairs, std::span<const double> h_grid,
                               double scale, bool corrected) {
  std::sort(pairs.begin(), pairs.end(),
            [](const PairContrib& a, const PairContrib& b) { return a.r < b.r; });
  RipleyCurve c;
  c.corrected = corrected;
  std::size_t idx = 0;
  double acc = 0.0;
  for (double h : h_grid) {
    while (idx < pairs.size() && pairs[idx].r <= h) acc += pairs[idx++].value;
    c.h.push_back(h);
    c.k_hat.push_back(acc * scale);
    c.reference.push_back(2.0 * h);
  }
  return c;
}

}  // namespace detail

// Homogeneous estimator: K(h) = (1 / (lambda N)) sum_i sum_{j != i} 1(|t_i - t_j| <= h)
// with lambda = N / n_days.
inline RipleyCurve ripley_naive(const InterArrivalSeries& ia, long n_days,
                                std::span<const double> h_grid) {
  const std::size_t N = ia.t.size();
  if (N < 2) throw DataError("ripley_naive: need at least 2 activity days");
  const double lambda = static_cast<double>(N) / static_cast<double>(n_days);
  std::vector<detail::PairContrib> pairs;
  pairs.reserve(N * (N - 1) / 2);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = i + 1; j < N; ++j)
      pairs.push_back({static_cast<double>(ia.t[j] - ia.t[i]), 2.0});  // both orders
  return detail::sweep_pairs(std::move(pairs), h_grid,
                             1.0 / (lambda * static_cast<double>(N)), false);
}

// Ripley edge-correction weight for center point t_i and distance R > 0;
// the four cases partition [t_1, t_N].
inline double ripley_edge_weight(double t_i, double t_first, double t_last, double R) {
  if (t_first + R <= t_i && t_i <= t_last - R) return 1.0;
  if (t_i > std::max(t_last - R, t_first + R)) return (t_last - t_i + R) / (2.0 * R);
  if (t_i < std::min(t_last - R, t_first + R)) return (R + t_i - t_first) / (2.0 * R);
  return (t_last - t_first) / (2.0 * R);
}

// Reweighted, edge-corrected estimator:
// K(h) = (1/n_days) sum_i sum_{j != i} 1(|t_i - t_j| <= h) / (p_i p_j w_ij).
inline RipleyCurve ripley_corrected(const InterArrivalSeries& ia, long n_days,
                                    std::span<const double> h_grid,
                                    std::span<const double> p_hat) {
  const std::size_t N = ia.t.size();
  if (N < 2) throw DataError("ripley_corrected: need at least 2 activity days");
  if (p_hat.size() != N)
    throw std::invalid_argument("ripley_corrected: p_hat size mismatch");
  for (double p : p_hat)
    if (!(p > 0.0 && p <= 1.0))
      throw std::invalid_argument("ripley_corrected: p_hat entries must be in (0,1]");

  const double t1 = static_cast<double>(ia.t.front());
  const double tN = static_cast<double>(ia.t.back());
  std::vector<detail::PairContrib> pairs;
  pairs.reserve(N * (N - 1) / 2);
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = i + 1; j < N; ++j) {
      const double R = static_cast<double>(ia.t[j] - ia.t[i]);
      const double wi = ripley_edge_weight(static_cast<double>(ia.t[i]), t1, tN, R);
      const double wj = ripley_edge_weight(static_cast<double>(ia.t[j]), t1, tN, R);
      const double pp = p_hat[i] * p_hat[j];
      pairs.push_back({R, 1.0 / (pp * wi) + 1.0 / (pp * wj)});
    }
  }
  return detail::sweep_pairs(std::move(pairs), h_grid,
                             1.0 / static_cast<double>(n_days), true);
}

// ---- State-conditional sub-series ---------------------------------------

struct SubseriesResult {
  EventSeries series;
  long days_in_state = 0;
  long n_act = 0;  // min(days in state, sub-series length)
};

// Patches together the segments labeled `state`, separating disjoint
// segments by Poisson(lambda = active days / n_days) many zero days.
inline SubseriesResult subseries(const EventSeries& series,
                                 std::span<const int> day_states, int state,
                                 std::uint64_t seed) {
  if (day_states.size() != series.counts.size())
    throw std::invalid_argument("subseries: day_states size mismatch");
  const double lambda =
      static_cast<double>(series.active_days()) / static_cast<double>(series.n_days());
  Rng rng(seed);

  SubseriesResult out;
  out.series.start_day = series.start_day;
  bool in_segment = false;
  bool any_segment = false;
  for (std::size_t i = 0; i < day_states.size(); ++i) {
    if (day_states[i] == state) {
      if (!in_segment && any_segment) {
        const long gap = rng.poisson(lambda);
        out.series.counts.insert(out.series.counts.end(), static_cast<std::size_t>(gap), 0L);
      }
      out.series.counts.push_back(series.counts[i]);
      ++out.days_in_state;
      in_segment = true;
      any_segment = true;
    } else {
      in_segment = false;
    }
  }
  if (!any_segment) throw DataError("subseries: state never visited");
  out.n_act = std::min<long>(out.days_in_state, out.series.n_days());
  return out;
}

// ---- Bootstrap confidence band ------------------------------------------

// Percentile band over curves rebuilt from gap-resampled point sets. The
// builder is called as builder(resampled_ia, resampled_span); the band is
// attached to the curve built from the original data. Resamples draw the
// inter-arrival gaps with replacement (preserves N); a resample's span keeps
// the original right-censor margin beyond its last point.
inline RipleyCurve bootstrap_band(
    const std::function<RipleyCurve(const InterArrivalSeries&, long)>& builder,
    const InterArrivalSeries& ia, long n_days, int resamples, double level,
    std::uint64_t seed) {
  RipleyCurve curve = builder(ia, n_days);
  if (resamples < 1) return curve;
  if (!(level >= 0.0 && level < 1.0))
    throw std::invalid_argument("bootstrap_band: level must be in [0,1)");

  const long margin = n_days - ia.t.back();
  const std::size_t m = ia.durations.size();
  std::vector<std::vector<double>> khat(static_cast<std::size_t>(resamples));
  parallel_for(static_cast<std::size_t>(resamples), [&](std::size_t rep) {
    Rng rng = Rng::stream(seed, rep);
    InterArrivalSeries r;
    r.durations.reserve(m);
    r.t.reserve(m);
    long acc = 0;
    for (std::size_t k = 0; k < m; ++k) {
      const long g = ia.durations[rng.index(m)];
      acc += g;
      r.durations.push_back(g);
      r.t.push_back(acc);
    }
    khat[rep] = builder(r, acc + margin).k_hat;
  });

  const double q_lo = level <= 0.0 ? 0.5 : (1.0 - level) / 2.0;
  const double q_hi = level <= 0.0 ? 0.5 : 1.0 - (1.0 - level) / 2.0;
  curve.ci_lo.resize(curve.h.size());
  curve.ci_hi.resize(curve.h.size());
  std::vector<double> col(static_cast<std::size_t>(resamples));
  for (std::size_t hi = 0; hi < curve.h.size(); ++hi) {
    for (std::size_t rep = 0; rep < khat.size(); ++rep) col[rep] = khat[rep][hi];
    std::sort(col.begin(), col.end());
    curve.ci_lo[hi] = quantile_sorted(col, q_lo);
    curve.ci_hi[hi] = quantile_sorted(col, q_hi);
  }
  return curve;
}

// ---- Goodness of fit for exponential spacings ----------------------------

struct KsResult {
  std::size_t n = 0;
  double statistic = 0.0;
  double alpha = 0.05;
  double critical = 0.0;
  double p_value = 1.0;
};

// Asymptotic two-sided critical value K_alpha = sqrt(-log(alpha/2) / (2n)).
inline double ks_critical(std::size_t n, double alpha) {
  if (n == 0 || !(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("ks_critical: need n >= 1 and alpha in (0,1)");
  return std::sqrt(-0.5 * std::log(alpha / 2.0) / static_cast<double>(n));
}

// Exact algebraic inverse of ks_critical: p = 2 exp(-2 n stat^2), clipped.
inline double ks_p_value(std::size_t n, double statistic) {
  const double p =
      2.0 * std::exp(-2.0 * static_cast<double>(n) * statistic * statistic);
  return std::clamp(p, 0.0, 1.0);
}

// Sup distance between the empirical CDF of z and the uniform CDF on [0,1].
inline double ks_statistic_uniform(std::vector<double> z) {
  if (z.empty()) throw std::invalid_argument("ks_statistic_uniform: empty sample");
  std::sort(z.begin(), z.end());
  const double n = static_cast<double>(z.size());
  double stat = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double lo = z[i] - static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n - z[i];
    stat = std::max({stat, lo, hi});
  }
  return stat;
}

// Tests exponentiality of durations via the spacings transform
// z_j = sum_{i<=j} y_i / sum_i y_i, which is uniform on [0,1] under the
// null. z_m == 1 identically, so the test uses z_1..z_{m-1} with n = m-1.
inline KsResult ks_exponential(std::span<const double> durations, double alpha = 0.05) {
  if (durations.size() < 2)
    throw DataError("ks_exponential: need at least 2 durations");
  double total = 0.0;
  for (double y : durations) {
    if (!(y > 0.0)) throw DataError("ks_exponential: non-positive duration");
    total += y;
  }
  std::vector<double> z;
  z.reserve(durations.size() - 1);
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < durations.size(); ++j) {
    acc += durations[j];
    z.push_back(acc / total);
  }
  KsResult res;
  res.n = z.size();
  res.alpha = alpha;
  res.statistic = ks_statistic_uniform(std::move(z));
  res.critical = ks_critical(res.n, alpha);
  res.p_value = ks_p_value(res.n, res.statistic);
  return res;
}

// ---- Q-Q data -------------------------------------------------------------

enum class QqTheoretical { Exponential, Poisson };

struct QqTable {
  std::vector<double> sample_q;
  std::vector<double> theoretical_q;
};

inline double poisson_quantile(double mean, double p) {
  double pmf = std::exp(-mean);
  double cdf = pmf;
  long k = 0;
  while (cdf < p && k < 100000) {
    ++k;
    pmf *= mean / static_cast<double>(k);
    cdf += pmf;
  }
  return static_cast<double>(k);
}

// Sorted sample quantiles against theoretical quantiles at plotting
// positions (i - 0.5) / n.
inline QqTable qq_data(std::vector<double> sample, QqTheoretical kind, double param) {
  if (sample.empty()) throw DataError("qq_data: empty sample");
  if (!(param > 0.0)) throw std::invalid_argument("qq_data: parameter must be > 0");
  std::sort(sample.begin(), sample.end());
  QqTable t;
  const double n = static_cast<double>(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double p = (static_cast<double>(i) + 0.5) / n;
    t.sample_q.push_back(sample[i]);
    t.theoretical_q.push_back(kind == QqTheoretical::Exponential
                                  ? -std::log1p(-p) / param
                                  : poisson_quantile(param, p));
  }
  return t;
}

}  // namespace ahmm
