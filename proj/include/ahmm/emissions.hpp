#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ahmm/math.hpp"
#include "ahmm/optimize.hpp"

namespace ahmm {

// Per-day count distribution families. One-parameter: Poisson, shifted
// zeta, geometric. Two-parameter: Polya (negative binomial with real r),
// hurdle zeta, hurdle geometric. Hurdle families put 1-gamma on zero and
// gamma times a renormalized positive-part law on k >= 1.
enum class Family { Poisson, ShiftedZeta, Geometric, Polya, HurdleZeta, HurdleGeometric };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::Poisson: return "poisson";
    case Family::ShiftedZeta: return "szeta";
    case Family::Geometric: return "geom";
    case Family::Polya: return "polya";
    case Family::HurdleZeta: return "hzeta";
    case Family::HurdleGeometric: return "hgeom";
  }
  return "?";
}

inline Family parse_family(const std::string& s) {
  if (s == "poisson") return Family::Poisson;
  if (s == "szeta") return Family::ShiftedZeta;
  if (s == "geom") return Family::Geometric;
  if (s == "polya") return Family::Polya;
  if (s == "hzeta") return Family::HurdleZeta;
  if (s == "hgeom") return Family::HurdleGeometric;
  throw std::invalid_argument("unknown family: " + s);
}

// Fitting bounds for the numerically estimated parameters.
inline constexpr double ZETA_S_MIN = 1.0001;
inline constexpr double ZETA_S_MAX = 50.0;
inline constexpr double POLYA_R_MIN = 1e-3;
inline constexpr double POLYA_R_MAX = 1e4;

struct EmissionModel {
  Family family = Family::Geometric;
  std::vector<double> params;  // see param layout per family below

  // Param layout:
  //   Poisson          {lambda}            lambda >= 0
  //   ShiftedZeta      {s}                 s > 1;  P(k) = (k+1)^-s / zeta(s)
  //   Geometric        {gamma}             gamma in [0,1); P(k) = (1-g) g^k
  //   Polya            {r, y}              r > 0, y in [0,1)
  //   HurdleZeta       {gamma, s}          gamma in [0,1], s > 1
  //   HurdleGeometric  {gamma, mu}         gamma in [0,1], mu in [0,1)

  int n_params() const {
    switch (family) {
      case Family::Poisson:
      case Family::ShiftedZeta:
      case Family::Geometric: return 1;
      default: return 2;
    }
  }

  void validate() const {
    auto need = [&](bool ok, const char* what) {
      if (!ok) throw std::domain_error(std::string("EmissionModel(") + family_name(family) +
                                       "): invalid parameter: " + what);
    };
    need(params.size() == static_cast<std::size_t>(n_params()), "count");
    switch (family) {
      case Family::Poisson:
        need(params[0] >= 0.0 && std::isfinite(params[0]), "lambda >= 0");
        break;
      case Family::ShiftedZeta:
        need(params[0] > 1.0, "s > 1");
        break;
      case Family::Geometric:
        need(params[0] >= 0.0 && params[0] < 1.0, "gamma in [0,1)");
        break;
      case Family::Polya:
        need(params[0] > 0.0, "r > 0");
        need(params[1] >= 0.0 && params[1] < 1.0, "y in [0,1)");
        break;
      case Family::HurdleZeta:
        need(params[0] >= 0.0 && params[0] <= 1.0, "gamma in [0,1]");
        need(params[1] > 1.0, "s > 1");
        break;
      case Family::HurdleGeometric:
        need(params[0] >= 0.0 && params[0] <= 1.0, "gamma in [0,1]");
        need(params[1] >= 0.0 && params[1] < 1.0, "mu in [0,1)");
        break;
    }
  }

  double log_pmf(long k) const {
    if (k < 0) return NEG_INF;
    const double kd = static_cast<double>(k);
    switch (family) {
      case Family::Poisson: {
        const double lam = params[0];
        if (lam == 0.0) return k == 0 ? 0.0 : NEG_INF;
        return -lam + kd * std::log(lam) - std::lgamma(kd + 1.0);
      }
      case Family::ShiftedZeta: {
        const double s = params[0];
        return -s * std::log(kd + 1.0) - std::log(riemann_zeta_cached(s));
      }
      case Family::Geometric: {
        const double g = params[0];
        if (g == 0.0) return k == 0 ? 0.0 : NEG_INF;
        return std::log1p(-g) + kd * std::log(g);
      }
      case Family::Polya: {
        const double r = params[0], y = params[1];
        if (y == 0.0) return k == 0 ? 0.0 : NEG_INF;
        return std::lgamma(kd + r) - std::lgamma(r) - std::lgamma(kd + 1.0) +
               kd * std::log(y) + r * std::log1p(-y);
      }
      case Family::HurdleZeta: {
        const double g = params[0], s = params[1];
        if (k == 0) return g < 1.0 ? std::log1p(-g) : NEG_INF;
        if (g == 0.0) return NEG_INF;
        return std::log(g) - s * std::log(kd) - std::log(riemann_zeta_cached(s));
      }
      case Family::HurdleGeometric: {
        const double g = params[0], mu = params[1];
        if (k == 0) return g < 1.0 ? std::log1p(-g) : NEG_INF;
        if (g == 0.0) return NEG_INF;
        if (mu == 0.0) return k == 1 ? std::log(g) : NEG_INF;
        return std::log(g) + std::log1p(-mu) + (kd - 1.0) * std::log(mu);
      }
    }
    return NEG_INF;
  }

  double pmf(long k) const { return std::exp(log_pmf(k)); }

  double mean() const {
    switch (family) {
      case Family::Poisson: return params[0];
      case Family::ShiftedZeta: {
        // E[K] = zeta(s-1)/zeta(s) - 1 for s > 2, else infinite.
        const double s = params[0];
        if (s <= 2.0) return std::numeric_limits<double>::infinity();
        return riemann_zeta(s - 1.0) / riemann_zeta(s) - 1.0;
      }
      case Family::Geometric: return params[0] / (1.0 - params[0]);
      case Family::Polya: return params[0] * params[1] / (1.0 - params[1]);
      case Family::HurdleZeta: {
        const double g = params[0], s = params[1];
        if (s <= 2.0) return std::numeric_limits<double>::infinity();
        return g * riemann_zeta(s - 1.0) / riemann_zeta(s);
      }
      case Family::HurdleGeometric:
        return params[0] / (1.0 - params[1]);
    }
    return 0.0;
  }

  // Probability the day is active, P(M > 0).
  double activity_prob() const { return 1.0 - pmf(0); }
};

struct FitResult {
  EmissionModel model;
  double log_likelihood = 0.0;
  double aic = 0.0;
  int n_params = 0;
  bool boundary = false;  // parameter pinned at its search/domain boundary
};

namespace detail {

struct WeightedStats {
  double w_total = 0.0;       // sum of weights
  double wk_total = 0.0;      // sum of w*k
  double w_pos = 0.0;         // weight on k >= 1
  double wk_pos = 0.0;        // sum of w*k over k >= 1
  double wlogk1 = 0.0;        // sum of w*log(k+1)
  double wlogk_pos = 0.0;     // sum of w*log(k) over k >= 1
};

inline WeightedStats weighted_stats(std::span<const long> data,
                                    std::span<const double> weights) {
  WeightedStats st;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double w = weights[i];
    const long k = data[i];
    st.w_total += w;
    st.wk_total += w * static_cast<double>(k);
    st.wlogk1 += w * std::log(static_cast<double>(k) + 1.0);
    if (k > 0) {
      st.w_pos += w;
      st.wk_pos += w * static_cast<double>(k);
      st.wlogk_pos += w * std::log(static_cast<double>(k));
    }
  }
  return st;
}

inline double weighted_log_likelihood(const EmissionModel& m, std::span<const long> data,
                                      std::span<const double> weights) {
  double ll = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (weights[i] > 0.0) ll += weights[i] * m.log_pmf(data[i]);
  return ll;
}

// argmax over s of -s*A - W*log(zeta(s)); concave in s.
inline double fit_zeta_exponent(double A, double W, bool* boundary) {
  const double s = golden_section_max(
      [&](double sv) { return -sv * A - W * std::log(riemann_zeta(sv)); }, ZETA_S_MIN,
      ZETA_S_MAX, 1e-10);
  if (boundary && (s <= ZETA_S_MIN * 1.00001 || s >= ZETA_S_MAX * 0.99999))
    *boundary = true;
  return s;
}

}  // namespace detail

// Weighted maximum-likelihood fit; the EM M-step uses this directly with
// posterior weights. Closed forms where they exist, bounded 1-D searches
// for the zeta exponent and the Polya r (y profiled out).
inline FitResult fit_ml_weighted(Family family, std::span<const long> data,
                                 std::span<const double> weights) {
  if (data.empty()) throw std::invalid_argument("fit_ml: empty data");
  if (weights.size() != data.size())
    throw std::invalid_argument("fit_ml: weight/data size mismatch");
  const auto st = detail::weighted_stats(data, weights);
  if (!(st.w_total > 0.0)) throw std::invalid_argument("fit_ml: zero total weight");

  FitResult res;
  res.model.family = family;
  bool boundary = false;
  const double m = st.wk_total / st.w_total;

  switch (family) {
    case Family::Poisson: {
      res.model.params = {m};
      boundary = (m == 0.0);
      break;
    }
    case Family::Geometric: {
      res.model.params = {m / (1.0 + m)};
      boundary = (m == 0.0);
      break;
    }
    case Family::ShiftedZeta: {
      const double s = detail::fit_zeta_exponent(st.wlogk1, st.w_total, &boundary);
      res.model.params = {s};
      break;
    }
    case Family::Polya: {
      if (m == 0.0) {
        res.model.params = {1.0, 1e-12};
        boundary = true;
        break;
      }
      auto profile_ll = [&](double log_r) {
        const double r = std::exp(log_r);
        const double y = m / (r + m);
        double ll = st.wk_total * std::log(y) + st.w_total * r * std::log1p(-y);
        for (std::size_t i = 0; i < data.size(); ++i) {
          if (weights[i] <= 0.0) continue;
          const double kd = static_cast<double>(data[i]);
          ll += weights[i] *
                (std::lgamma(kd + r) - std::lgamma(r) - std::lgamma(kd + 1.0));
        }
        return ll;
      };
      const double log_r = golden_section_max(profile_ll, std::log(POLYA_R_MIN),
                                              std::log(POLYA_R_MAX), 1e-9);
      const double r = std::exp(log_r);
      if (r <= POLYA_R_MIN * 1.001 || r >= POLYA_R_MAX * 0.999) boundary = true;
      res.model.params = {r, m / (r + m)};
      break;
    }
    case Family::HurdleZeta: {
      const double gamma = st.w_pos / st.w_total;
      double s = 2.0;
      if (st.w_pos > 0.0)
        s = detail::fit_zeta_exponent(st.wlogk_pos, st.w_pos, &boundary);
      else
        boundary = true;
      res.model.params = {gamma, s};
      break;
    }
    case Family::HurdleGeometric: {
      const double gamma = st.w_pos / st.w_total;
      double mu = 0.0;
      if (st.w_pos > 0.0) {
        const double m_pos = st.wk_pos / st.w_pos;  // >= 1
        mu = (m_pos - 1.0) / m_pos;
      } else {
        boundary = true;
      }
      res.model.params = {gamma, mu};
      break;
    }
  }

  res.model.validate();
  res.n_params = res.model.n_params();
  res.log_likelihood = detail::weighted_log_likelihood(res.model, data, weights);
  res.aic = 2.0 * res.n_params - 2.0 * res.log_likelihood;
  res.boundary = boundary;
  return res;
}

inline FitResult fit_ml(Family family, std::span<const long> data) {
  const std::vector<double> w(data.size(), 1.0);
  return fit_ml_weighted(family, data, w);
}

// ---- Window-level densities (delta-day windows) ----------------------

// X ~ Binomial(delta, gamma): number of active days in the window.
inline double log_window_pmf_x(double gamma, int delta, long k) {
  if (k < 0 || k > delta) return NEG_INF;
  if (gamma <= 0.0) return k == 0 ? 0.0 : NEG_INF;
  if (gamma >= 1.0) return k == delta ? 0.0 : NEG_INF;
  return log_binomial(delta, k) + static_cast<double>(k) * std::log(gamma) +
         static_cast<double>(delta - k) * std::log1p(-gamma);
}

inline double window_pmf_x(double gamma, int delta, long k) {
  return std::exp(log_window_pmf_x(gamma, delta, k));
}

// Bound on |Binomial(delta,gamma) - Poisson(delta*gamma)| at k; the k = 0
// branch uses only the 1 - e^{-delta*gamma} term.
inline double poisson_bound(double gamma, int delta, long k) {
  const double dg = static_cast<double>(delta) * gamma;
  const double a = -std::expm1(-dg);  // 1 - e^{-dg}
  if (k <= 0) return a * gamma;
  return std::min(a, dg / static_cast<double>(k)) * gamma;
}

// Total attacks in a window under i.i.d. geometric days:
// P(Y = r) = (1-gamma)^delta * gamma^r * C(delta+r-1, r).
inline double log_window_pmf_y_geometric(double gamma, int delta, long r) {
  if (r < 0) return NEG_INF;
  if (gamma <= 0.0) return r == 0 ? 0.0 : NEG_INF;
  if (gamma >= 1.0) return NEG_INF;
  return static_cast<double>(delta) * std::log1p(-gamma) +
         static_cast<double>(r) * std::log(gamma) + log_binomial(delta + r - 1, r);
}

inline double window_pmf_y_geometric(double gamma, int delta, long r) {
  return std::exp(log_window_pmf_y_geometric(gamma, delta, r));
}

// Joint law of (X, Y) over a window; geometric and hurdle-geometric days.
inline double log_window_pmf_joint(const EmissionModel& m, int delta, long k, long r) {
  if (k < 0 || k > delta || r < k) return NEG_INF;
  if (k == 0 && r > 0) return NEG_INF;
  switch (m.family) {
    case Family::Geometric: {
      const double g = m.params[0];
      if (g <= 0.0) return (k == 0 && r == 0) ? 0.0 : NEG_INF;
      if (g >= 1.0) return NEG_INF;
      if (k == 0) return static_cast<double>(delta) * std::log1p(-g);  // r == 0 here
      return static_cast<double>(delta) * std::log1p(-g) +
             static_cast<double>(r) * std::log(g) + log_binomial(delta, k) +
             log_binomial(r - 1, r - k);
    }
    case Family::HurdleGeometric: {
      const double g = m.params[0], mu = m.params[1];
      if (k == 0) return g < 1.0 ? static_cast<double>(delta) * std::log1p(-g) : NEG_INF;
      if (g <= 0.0) return NEG_INF;
      double ll = log_binomial(delta, k) + log_binomial(r - 1, r - k) +
                  static_cast<double>(delta - k) * std::log1p(-g) +
                  static_cast<double>(k) * std::log(g) +
                  static_cast<double>(k) * std::log1p(-mu);
      if (r > k) ll += (mu > 0.0 ? static_cast<double>(r - k) * std::log(mu) : NEG_INF);
      return ll;
    }
    default:
      throw std::invalid_argument("window_pmf_joint: unsupported family");
  }
}

inline double window_pmf_joint(const EmissionModel& m, int delta, long k, long r) {
  return std::exp(log_window_pmf_joint(m, delta, k, r));
}

// Marginal law of Y under hurdle-geometric days (no closed form; sums the
// joint over the feasible active-day counts).
inline double log_window_pmf_y_hurdle(const EmissionModel& m, int delta, long r) {
  if (r < 0) return NEG_INF;
  if (r == 0) return log_window_pmf_joint(m, delta, 0, 0);
  const long k_hi = std::min<long>(delta, r);
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(k_hi));
  for (long k = 1; k <= k_hi; ++k)
    terms.push_back(log_window_pmf_joint(m, delta, k, r));
  return log_sum_exp(terms);
}

// ---- AIC model-comparison table ---------------------------------------

// One fitted family on one state's per-day counts, with the expected
// day-count histogram used for Table-style reporting (k = 0..4 and >4).
struct AicRow {
  FitResult fit;
  std::vector<double> expected;  // expected number of days with k attacks, k = 0..4
  double expected_gt4 = 0.0;
  std::size_t n_days = 0;
};

inline std::vector<std::vector<AicRow>> aic_table(
    const std::vector<std::vector<long>>& data_by_state,
    const std::vector<Family>& families) {
  std::vector<std::vector<AicRow>> table;
  table.reserve(data_by_state.size());
  for (const auto& data : data_by_state) {
    std::vector<AicRow> rows;
    rows.reserve(families.size());
    for (Family f : families) {
      AicRow row;
      row.fit = fit_ml(f, data);
      row.n_days = data.size();
      const double n = static_cast<double>(data.size());
      double head = 0.0;
      for (long k = 0; k <= 4; ++k) {
        const double p = row.fit.model.pmf(k);
        row.expected.push_back(n * p);
        head += p;
      }
      row.expected_gt4 = n * (1.0 - head);
      rows.push_back(std::move(row));
    }
    table.push_back(std::move(rows));
  }
  return table;
}

}  // namespace ahmm
