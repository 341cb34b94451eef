#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "ahmm/emissions.hpp"
#include "ahmm/math.hpp"
#include "ahmm/optimize.hpp"
#include "ahmm/parallel.hpp"
#include "ahmm/rng.hpp"
#include "ahmm/series.hpp"

namespace ahmm {

// Self-exciting hurdle model: on day i the zero/positive hurdle is
//   P(M_i = 0 | H) = exp(-(B_i + SE_i)),
//   P(M_i = r | H) = r^-s / zeta(s) * (1 - exp(-(B_i + SE_i))),  r >= 1,
// with SE_i = sum over past active days j of alpha * exp(-omega (i - j)).
// The default configuration has exactly four parameters: constant baseline
// B_i = b, excitation alpha, decay omega, zeta exponent s. A linear-trend
// baseline B_i = b + trend * (i - 1) is available behind the fit_trend
// option and excluded from the default.
struct SehmModel {
  double b = 0.1;
  double alpha = 0.0;
  double omega = 1.0;
  double s = 2.0;
  double trend = 0.0;

  // Baseline on day i (1-based).
  double baseline_at(long i) const { return b + trend * static_cast<double>(i - 1); }

  void validate() const {
    if (!(b > 0.0)) throw std::domain_error("SehmModel: b must be > 0");
    if (!(alpha >= 0.0)) throw std::domain_error("SehmModel: alpha must be >= 0");
    if (!(omega > 0.0)) throw std::domain_error("SehmModel: omega must be > 0");
    if (!(s > 1.0)) throw std::domain_error("SehmModel: s must be > 1");
    if (!std::isfinite(trend)) throw std::domain_error("SehmModel: trend must be finite");
  }
};

// Tracks SE_i incrementally in O(1) per day (exponential kernel).
class SehmExcitation {
 public:
  explicit SehmExcitation(const SehmModel& m)
      : alpha_(m.alpha), decay_(std::exp(-m.omega)) {}

  double se() const { return se_; }

  // Advances from day i to day i+1 given whether day i was active.
  void step(bool active) { se_ = decay_ * (se_ + (active ? alpha_ : 0.0)); }

 private:
  double alpha_;
  double decay_;
  double se_ = 0.0;
};

// Excitation level on day i given the daily history M_1..M_{i-1}.
inline double sehm_excitation_at(const SehmModel& m, std::span<const long> history) {
  SehmExcitation ex(m);
  for (long c : history) ex.step(c > 0);
  return ex.se();
}

struct SehmIntensity {
  double se = 0.0;
  double hurdle_prob = 0.0;  // P(M_i > 0 | H_{i-1})
};

inline SehmIntensity sehm_intensity(const SehmModel& m, std::span<const long> history) {
  m.validate();
  SehmIntensity out;
  out.se = sehm_excitation_at(m, history);
  out.hurdle_prob =
      -std::expm1(-(m.baseline_at(static_cast<long>(history.size()) + 1) + out.se));
  return out;
}

// P(M_i = r | H_{i-1}) given the day's baseline and excitation level.
inline double sehm_pmf_at(const SehmModel& m, double baseline, double se, long r) {
  const double x = baseline + se;
  if (r < 0) return 0.0;
  if (r == 0) return std::exp(-x);
  return std::pow(static_cast<double>(r), -m.s) / riemann_zeta_cached(m.s) * (-std::expm1(-x));
}

// Constant-baseline shorthand (the default four-parameter configuration).
inline double sehm_pmf(const SehmModel& m, double se, long r) {
  return sehm_pmf_at(m, m.b, se, r);
}

// Exact log-likelihood of the daily counts: sum_i log P(M_i | H_{i-1}).
// Returns -inf when a trend drives the baseline nonpositive inside the span.
inline double sehm_log_likelihood(const SehmModel& m, const EventSeries& series) {
  const double log_zeta = std::log(riemann_zeta(m.s));
  SehmExcitation ex(m);
  double ll = 0.0;
  for (long i = 0; i < series.n_days(); ++i) {
    const long c = series.counts[static_cast<std::size_t>(i)];
    const double base = m.baseline_at(i + 1);
    if (!(base > 0.0)) return NEG_INF;
    const double x = base + ex.se();
    if (c == 0)
      ll += -x;
    else
      ll += log1mexp(x) - m.s * std::log(static_cast<double>(c)) - log_zeta;
    ex.step(c > 0);
  }
  return ll;
}

// Likelihood of the activity timing alone (the hurdle/Bernoulli part).
// This is exactly the model's law for the inter-arrival sequence and is the
// comparable quantity when both SEHM and an event-level HMM explain
// {Delta T}; the zeta magnitude part has no effect on timing.
inline double sehm_timing_log_likelihood(const SehmModel& m, std::span<const long> counts) {
  SehmExcitation ex(m);
  double ll = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double base = m.baseline_at(static_cast<long>(i) + 1);
    if (!(base > 0.0)) return NEG_INF;
    const double x = base + ex.se();
    ll += (counts[i] > 0) ? log1mexp(x) : -x;
    ex.step(counts[i] > 0);
  }
  return ll;
}

struct SehmFit {
  SehmModel model;
  double log_likelihood = 0.0;
  double aic = 0.0;  // 2 * n_params - 2 * ll; 8 - 2 * ll in the default config
  int n_params = 4;
  bool converged = false;
  bool boundary = false;
};

struct SehmFitOptions {
  double tol = 1e-9;
  int max_iter = 3000;
  int starts = 8;
  std::uint64_t seed = 1;
  bool fix_alpha_zero = false;  // degenerate homogeneous hurdle
  bool timing_only = false;     // maximize the hurdle part only (s inert)
  bool fit_trend = false;       // non-default fifth parameter B_i = b + c*(i-1)
  SehmModel init{0.1, 0.5, 0.2, 2.5};
  // box bounds enforced through the log-parameter transform
  double b_max = 20.0, alpha_max = 50.0, omega_min = 1e-4, omega_max = 10.0;
  double trend_max = 0.1;  // per-day drift bound
};

namespace detail {

struct SehmParamMap {
  const SehmFitOptions& opt;

  // theta = (log b, log alpha, log omega, log(s-1), trend); fixed entries
  // dropped.
  std::vector<double> pack(const SehmModel& m) const {
    std::vector<double> th{std::log(m.b)};
    if (!opt.fix_alpha_zero) {
      th.push_back(std::log(std::max(m.alpha, 1e-6)));
      th.push_back(std::log(m.omega));
    }
    if (!opt.timing_only) th.push_back(std::log(m.s - 1.0));
    if (opt.fit_trend) th.push_back(m.trend);
    return th;
  }

  SehmModel unpack(const std::vector<double>& th) const {
    SehmModel m = opt.init;
    std::size_t k = 0;
    m.b = std::clamp(std::exp(th[k++]), 1e-8, opt.b_max);
    if (opt.fix_alpha_zero) {
      m.alpha = 0.0;
    } else {
      m.alpha = std::clamp(std::exp(th[k++]), 0.0, opt.alpha_max);
      m.omega = std::clamp(std::exp(th[k++]), opt.omega_min, opt.omega_max);
    }
    if (!opt.timing_only) m.s = std::clamp(1.0 + std::exp(th[k++]), ZETA_S_MIN, ZETA_S_MAX);
    if (opt.fit_trend)
      m.trend = std::clamp(th[k++], -opt.trend_max, opt.trend_max);
    else
      m.trend = 0.0;
    return m;
  }
};

}  // namespace detail

// Maximum-likelihood fit by multi-start Nelder-Mead over log-transformed
// parameters; deterministic under the seed, best start kept.
inline SehmFit sehm_fit(const EventSeries& series, const SehmFitOptions& opt = {}) {
  bool any_active = false, any_inactive = false;
  for (long c : series.counts) (c > 0 ? any_active : any_inactive) = true;
  if (!any_active || !any_inactive)
    throw DataError("sehm_fit: series needs at least one active and one inactive day");

  const detail::SehmParamMap map{opt};
  auto objective = [&](const std::vector<double>& th) {
    const SehmModel m = map.unpack(th);
    return opt.timing_only ? sehm_timing_log_likelihood(m, series.counts)
                           : sehm_log_likelihood(m, series);
  };

  const std::vector<double> th0 = map.pack(opt.init);
  const int n_starts = std::max(1, opt.starts);
  std::vector<NelderMeadResult> runs(static_cast<std::size_t>(n_starts));
  parallel_for(static_cast<std::size_t>(n_starts), [&](std::size_t i) {
    std::vector<double> th = th0;
    if (i > 0) {
      Rng rng = Rng::stream(opt.seed, i);
      for (double& v : th) v += 2.0 * (rng.uniform() - 0.5) * 1.5;
    }
    runs[i] = nelder_mead_max(objective, th, 0.5, opt.tol, opt.max_iter);
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < runs.size(); ++i)
    if (runs[i].fx > runs[best].fx) best = i;

  SehmFit fit;
  fit.model = map.unpack(runs[best].x);
  fit.log_likelihood = runs[best].fx;
  fit.n_params = 4 + (opt.fit_trend ? 1 : 0);
  fit.aic = 2.0 * fit.n_params - 2.0 * fit.log_likelihood;
  fit.converged = runs[best].converged;
  fit.boundary = fit.model.b <= 1e-8 * 1.01 || fit.model.b >= opt.b_max * 0.99 ||
                 fit.model.alpha >= opt.alpha_max * 0.99 ||
                 (!opt.fix_alpha_zero && (fit.model.omega <= opt.omega_min * 1.01 ||
                                          fit.model.omega >= opt.omega_max * 0.99)) ||
                 (!opt.timing_only &&
                  (fit.model.s <= ZETA_S_MIN * 1.0001 || fit.model.s >= ZETA_S_MAX * 0.999));
  return fit;
}

// Ratio of attack probability with vs without the self-exciting term:
// 1 + e^{-B}/(1 - e^{-B}) * (1 - e^{-SE}) >= 1, equality iff SE = 0.
inline double excitation_ratio(const SehmModel& m, std::span<const long> history) {
  m.validate();
  const double se = sehm_excitation_at(m, history);
  const double base = m.baseline_at(static_cast<long>(history.size()) + 1);
  return 1.0 + std::exp(-base) / (-std::expm1(-base)) * (-std::expm1(-se));
}

// Conditional mean time to the next active day, excitation frozen at the
// prediction origin (the day following the given history).
inline double sehm_predict_next(const SehmModel& m, std::span<const long> history) {
  m.validate();
  const double se = sehm_excitation_at(m, history);
  const double base = m.baseline_at(static_cast<long>(history.size()) + 1);
  return 1.0 / (-std::expm1(-(base + se)));
}

// Draws a daily series of length n_days from the model. Positive counts
// are zeta(s)-distributed via an inverse-CDF table truncated where the
// integral tail bound drops below 1e-10.
inline EventSeries simulate_sehm(const SehmModel& m, long n_days, std::uint64_t seed,
                                 Day start_day = 0) {
  m.validate();
  const double zeta_s = riemann_zeta(m.s);
  std::vector<double> cdf;
  {
    double acc = 0.0;
    long k = 1;
    for (;;) {
      acc += std::pow(static_cast<double>(k), -m.s) / zeta_s;
      cdf.push_back(acc);
      const double tail = std::pow(static_cast<double>(k), 1.0 - m.s) / ((m.s - 1.0) * zeta_s);
      if (tail < 1e-10 || k > 2000000) break;
      ++k;
    }
  }
  auto draw_zeta = [&](Rng& rng) -> long {
    const double u = rng.uniform();
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    return static_cast<long>(it - cdf.begin()) + 1;
  };

  Rng rng(seed);
  EventSeries out;
  out.start_day = start_day;
  out.counts.reserve(static_cast<std::size_t>(n_days));
  SehmExcitation ex(m);
  for (long i = 0; i < n_days; ++i) {
    const double base = std::max(m.baseline_at(i + 1), 1e-12);
    const double p_active = -std::expm1(-(base + ex.se()));
    const bool active = rng.bernoulli(p_active);
    out.counts.push_back(active ? draw_zeta(rng) : 0L);
    ex.step(active);
  }
  return out;
}

}  // namespace ahmm
