#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ahmm/emissions.hpp"
#include "ahmm/math.hpp"
#include "ahmm/optimize.hpp"
#include "ahmm/rng.hpp"
#include "ahmm/series.hpp"

namespace ahmm {

struct TransitionMatrix {
  int d = 2;
  std::vector<double> p;  // row-major d x d

  static TransitionMatrix two_state(double p0, double q0) {
    TransitionMatrix t;
    t.d = 2;
    t.p = {1.0 - p0, p0, q0, 1.0 - q0};
    return t;
  }

  double at(int i, int j) const { return p[static_cast<std::size_t>(i * d + j)]; }
  double& at(int i, int j) { return p[static_cast<std::size_t>(i * d + j)]; }

  void validate() const {
    if (d < 1 || p.size() != static_cast<std::size_t>(d) * static_cast<std::size_t>(d))
      throw std::domain_error("TransitionMatrix: bad dimensions");
    for (int i = 0; i < d; ++i) {
      double row = 0.0;
      for (int j = 0; j < d; ++j) {
        const double v = at(i, j);
        if (!(v >= 0.0 && v <= 1.0))
          throw std::domain_error("TransitionMatrix: entry outside [0,1]");
        row += v;
      }
      if (std::abs(row - 1.0) > 1e-12)
        throw std::domain_error("TransitionMatrix: row does not sum to 1");
    }
  }

  // Stationary distribution; closed form for d = 2, power iteration otherwise.
  std::vector<double> stationary() const {
    if (d == 2) {
      const double p0 = at(0, 1), q0 = at(1, 0);
      if (p0 + q0 <= 0.0) return {0.5, 0.5};
      return {q0 / (p0 + q0), p0 / (p0 + q0)};
    }
    std::vector<double> pi(static_cast<std::size_t>(d), 1.0 / d), nxt(pi.size());
    for (int it = 0; it < 10000; ++it) {
      for (int j = 0; j < d; ++j) {
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += pi[static_cast<std::size_t>(i)] * at(i, j);
        nxt[static_cast<std::size_t>(j)] = s;
      }
      double diff = 0.0;
      for (std::size_t j = 0; j < pi.size(); ++j) diff += std::abs(nxt[j] - pi[j]);
      pi.swap(nxt);
      if (diff < 1e-15) break;
    }
    return pi;
  }
};

// What the per-step observation is: window statistics (X, Y or the pair),
// raw daily counts, or inter-arrival durations.
enum class ObsKind { X, Y, XY, Daily, Dt };

inline const char* obs_kind_name(ObsKind k) {
  switch (k) {
    case ObsKind::X: return "x";
    case ObsKind::Y: return "y";
    case ObsKind::XY: return "xy";
    case ObsKind::Daily: return "daily";
    case ObsKind::Dt: return "dt";
  }
  return "?";
}

inline ObsKind parse_obs_kind(const std::string& s) {
  if (s == "x") return ObsKind::X;
  if (s == "y") return ObsKind::Y;
  if (s == "xy") return ObsKind::XY;
  if (s == "daily") return ObsKind::Daily;
  if (s == "dt") return ObsKind::Dt;
  throw std::invalid_argument("unknown observation kind: " + s);
}

struct ObsSeq {
  ObsKind kind = ObsKind::XY;
  std::vector<Window> windows;  // X / Y / XY
  std::vector<long> daily;      // Daily
  std::vector<long> durations;  // Dt

  std::size_t size() const {
    switch (kind) {
      case ObsKind::Daily: return daily.size();
      case ObsKind::Dt: return durations.size();
      default: return windows.size();
    }
  }

  static ObsSeq from_windows(const WindowSeries& ws, ObsKind kind,
                             bool include_partial = false) {
    ObsSeq o;
    o.kind = kind;
    for (const auto& w : ws.windows)
      if (include_partial || !w.partial) o.windows.push_back(w);
    return o;
  }

  static ObsSeq from_daily(const EventSeries& s) {
    ObsSeq o;
    o.kind = ObsKind::Daily;
    o.daily = s.counts;
    return o;
  }

  static ObsSeq from_interarrivals(const InterArrivalSeries& ia) {
    ObsSeq o;
    o.kind = ObsKind::Dt;
    o.durations = ia.durations;
    return o;
  }
};

struct HmmModel {
  TransitionMatrix transition;
  std::vector<EmissionModel> emissions;  // per state; index 0 = Inactive
  std::vector<double> initial;
  ObsKind obs_kind = ObsKind::XY;

  int d() const { return transition.d; }

  // gamma_j: per-day activity probability of state j.
  double state_rate(int j) const {
    return emissions[static_cast<std::size_t>(j)].activity_prob();
  }

  void validate() const {
    transition.validate();
    if (emissions.size() != static_cast<std::size_t>(d()) ||
        initial.size() != static_cast<std::size_t>(d()))
      throw std::domain_error("HmmModel: per-state vectors must have d entries");
    double tot = 0.0;
    for (double v : initial) {
      if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("HmmModel: bad initial");
      tot += v;
    }
    if (std::abs(tot - 1.0) > 1e-9)
      throw std::domain_error("HmmModel: initial distribution must sum to 1");
    for (const auto& e : emissions) {
      e.validate();
      if (obs_kind != ObsKind::Daily && e.family != Family::Geometric &&
          e.family != Family::HurdleGeometric)
        throw std::invalid_argument(
            "HmmModel: window/duration observations require the geometric or "
            "hurdle-geometric family");
    }
  }
};

namespace detail {

inline double log_obs_prob(const HmmModel& m, int state, const ObsSeq& obs,
                           std::size_t n) {
  const EmissionModel& e = m.emissions[static_cast<std::size_t>(state)];
  switch (obs.kind) {
    case ObsKind::X: {
      const auto& w = obs.windows[n];
      return log_window_pmf_x(e.params[0], w.length, w.x);
    }
    case ObsKind::Y: {
      const auto& w = obs.windows[n];
      if (e.family == Family::Geometric)
        return log_window_pmf_y_geometric(e.params[0], w.length, w.y);
      return log_window_pmf_y_hurdle(e, w.length, w.y);
    }
    case ObsKind::XY: {
      const auto& w = obs.windows[n];
      return log_window_pmf_joint(e, w.length, w.x, w.y);
    }
    case ObsKind::Daily:
      return e.log_pmf(obs.daily[n]);
    case ObsKind::Dt: {
      const double g = e.params[0];
      const double t = static_cast<double>(obs.durations[n]);
      if (g <= 0.0 || g > 1.0) return NEG_INF;
      if (g == 1.0) return obs.durations[n] == 1 ? 0.0 : NEG_INF;
      return std::log(g) + (t - 1.0) * std::log1p(-g);
    }
  }
  return NEG_INF;
}

// K x d table of emission log-probabilities.
inline std::vector<double> emission_table(const HmmModel& m, const ObsSeq& obs) {
  const std::size_t K = obs.size();
  const int d = m.d();
  std::vector<double> b(K * static_cast<std::size_t>(d));
  for (std::size_t n = 0; n < K; ++n) {
    double best = NEG_INF;
    for (int j = 0; j < d; ++j) {
      const double v = log_obs_prob(m, j, obs, n);
      b[n * d + static_cast<std::size_t>(j)] = v;
      best = std::max(best, v);
    }
    if (best == NEG_INF)
      throw DataError("hmm: observation " + std::to_string(n) +
                      " has zero likelihood under every state");
  }
  return b;
}

}  // namespace detail

struct ForwardBackwardResult {
  double log_likelihood = 0.0;
  std::vector<std::vector<double>> posteriors;   // K rows, d cols
  std::vector<double> expected_transitions;      // d x d summed pairwise posteriors
};

inline ForwardBackwardResult forward_backward(const HmmModel& model, const ObsSeq& obs) {
  model.validate();
  const std::size_t K = obs.size();
  if (K == 0) throw std::invalid_argument("forward_backward: empty observations");
  const int d = model.d();
  const std::size_t dz = static_cast<std::size_t>(d);
  const auto b = detail::emission_table(model, obs);

  std::vector<double> lp(dz * dz);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      lp[static_cast<std::size_t>(i) * dz + static_cast<std::size_t>(j)] =
          model.transition.at(i, j) > 0.0 ? std::log(model.transition.at(i, j)) : NEG_INF;

  std::vector<double> la(K * dz), lb(K * dz);
  for (std::size_t j = 0; j < dz; ++j)
    la[j] = (model.initial[j] > 0.0 ? std::log(model.initial[j]) : NEG_INF) + b[j];
  std::vector<double> scratch(dz);
  for (std::size_t n = 1; n < K; ++n) {
    for (std::size_t j = 0; j < dz; ++j) {
      for (std::size_t i = 0; i < dz; ++i)
        scratch[i] = la[(n - 1) * dz + i] + lp[i * dz + j];
      la[n * dz + j] = log_sum_exp(scratch) + b[n * dz + j];
    }
  }
  for (std::size_t j = 0; j < dz; ++j) lb[(K - 1) * dz + j] = 0.0;
  for (std::size_t n = K - 1; n-- > 0;) {
    for (std::size_t i = 0; i < dz; ++i) {
      for (std::size_t j = 0; j < dz; ++j)
        scratch[j] = lp[i * dz + j] + b[(n + 1) * dz + j] + lb[(n + 1) * dz + j];
      lb[n * dz + i] = log_sum_exp(scratch);
    }
  }

  ForwardBackwardResult res;
  res.log_likelihood =
      log_sum_exp(std::span<const double>(la).subspan((K - 1) * dz, dz));
  if (!std::isfinite(res.log_likelihood))
    throw DataError("hmm: zero total likelihood");

  res.posteriors.assign(K, std::vector<double>(dz, 0.0));
  for (std::size_t n = 0; n < K; ++n) {
    for (std::size_t j = 0; j < dz; ++j)
      res.posteriors[n][j] = std::exp(la[n * dz + j] + lb[n * dz + j] - res.log_likelihood);
    double tot = std::accumulate(res.posteriors[n].begin(), res.posteriors[n].end(), 0.0);
    if (tot > 0.0)
      for (double& v : res.posteriors[n]) v /= tot;
  }

  res.expected_transitions.assign(dz * dz, 0.0);
  for (std::size_t n = 0; n + 1 < K; ++n)
    for (std::size_t i = 0; i < dz; ++i)
      for (std::size_t j = 0; j < dz; ++j)
        res.expected_transitions[i * dz + j] +=
            std::exp(la[n * dz + i] + lp[i * dz + j] + b[(n + 1) * dz + j] +
                     lb[(n + 1) * dz + j] - res.log_likelihood);
  return res;
}

struct StatePath {
  std::vector<int> states;
  std::vector<std::vector<double>> posteriors;  // from forward-backward
  double path_log_prob = 0.0;                   // log P(path, observations)
  double marginal_log_likelihood = 0.0;
};

// Most probable joint state path; ties break toward the lower state index.
inline StatePath viterbi(const HmmModel& model, const ObsSeq& obs) {
  model.validate();
  const std::size_t K = obs.size();
  if (K == 0) throw std::invalid_argument("viterbi: empty observations");
  const int d = model.d();
  const std::size_t dz = static_cast<std::size_t>(d);
  const auto b = detail::emission_table(model, obs);

  std::vector<double> score(K * dz, NEG_INF);
  std::vector<int> back(K * dz, 0);
  for (std::size_t j = 0; j < dz; ++j)
    score[j] = (model.initial[j] > 0.0 ? std::log(model.initial[j]) : NEG_INF) + b[j];
  for (std::size_t n = 1; n < K; ++n) {
    for (std::size_t j = 0; j < dz; ++j) {
      double best = NEG_INF;
      int arg = 0;
      for (std::size_t i = 0; i < dz; ++i) {
        const double lpij = model.transition.at(static_cast<int>(i), static_cast<int>(j));
        const double cand =
            score[(n - 1) * dz + i] + (lpij > 0.0 ? std::log(lpij) : NEG_INF);
        if (cand > best) {  // strict: first (lowest) index wins ties
          best = cand;
          arg = static_cast<int>(i);
        }
      }
      score[n * dz + j] = best + b[n * dz + j];
      back[n * dz + j] = arg;
    }
  }

  StatePath path;
  path.states.assign(K, 0);
  double best = NEG_INF;
  int arg = 0;
  for (std::size_t j = 0; j < dz; ++j) {
    if (score[(K - 1) * dz + j] > best) {
      best = score[(K - 1) * dz + j];
      arg = static_cast<int>(j);
    }
  }
  path.path_log_prob = best;
  path.states[K - 1] = arg;
  for (std::size_t n = K - 1; n-- > 0;)
    path.states[n] = back[(n + 1) * dz + static_cast<std::size_t>(path.states[n + 1])];

  const auto fb = forward_backward(model, obs);
  path.posteriors = fb.posteriors;
  path.marginal_log_likelihood = fb.log_likelihood;
  return path;
}

struct BaumWelchResult {
  HmmModel model;
  std::vector<double> ll_trace;
  int iterations = 0;
  bool converged = false;
  bool state_collapsed = false;
};

namespace detail {

inline double clamp_prob(double v) { return std::clamp(v, 1e-12, 1.0 - 1e-12); }

// Posterior-weighted ML update of one state's emission. Closed forms for
// the geometric-family window statistics; numerical search where none
// exists (hurdle Y marginal), guarded so the expected log-likelihood never
// decreases.
inline EmissionModel m_step_emission(const EmissionModel& cur, const ObsSeq& obs,
                                     std::span<const double> w) {
  EmissionModel next = cur;
  switch (obs.kind) {
    case ObsKind::X: {
      double num = 0.0, den = 0.0;
      for (std::size_t n = 0; n < obs.windows.size(); ++n) {
        num += w[n] * obs.windows[n].x;
        den += w[n] * obs.windows[n].length;
      }
      if (den > 0.0) next.params[0] = clamp_prob(num / den);
      // hurdle mu is unidentifiable from X alone; left unchanged
      return next;
    }
    case ObsKind::Y: {
      if (cur.family == Family::Geometric) {
        double num = 0.0, den = 0.0;
        for (std::size_t n = 0; n < obs.windows.size(); ++n) {
          num += w[n] * static_cast<double>(obs.windows[n].y);
          den += w[n] * static_cast<double>(obs.windows[n].y + obs.windows[n].length);
        }
        if (den > 0.0) next.params[0] = clamp_prob(num / den);
        return next;
      }
      // Hurdle-geometric Y marginal: bounded 2-D search on logit scale.
      auto wll = [&](const EmissionModel& e) {
        double ll = 0.0;
        for (std::size_t n = 0; n < obs.windows.size(); ++n)
          if (w[n] > 0.0)
            ll += w[n] * log_window_pmf_y_hurdle(e, obs.windows[n].length,
                                                 obs.windows[n].y);
        return ll;
      };
      auto from_logit = [](double a) { return 1.0 / (1.0 + std::exp(-a)); };
      auto to_logit = [](double p) {
        const double q = std::clamp(p, 1e-9, 1.0 - 1e-9);
        return std::log(q / (1.0 - q));
      };
      const auto r = nelder_mead_max(
          [&](const std::vector<double>& th) {
            EmissionModel e = cur;
            e.params[0] = clamp_prob(from_logit(th[0]));
            e.params[1] = clamp_prob(from_logit(th[1]));
            return wll(e);
          },
          {to_logit(cur.params[0]), to_logit(cur.params[1])}, 0.3, 1e-11, 400);
      EmissionModel cand = cur;
      cand.params[0] = clamp_prob(from_logit(r.x[0]));
      cand.params[1] = clamp_prob(from_logit(r.x[1]));
      return wll(cand) >= wll(cur) ? cand : cur;
    }
    case ObsKind::XY: {
      if (cur.family == Family::Geometric) {
        double num = 0.0, den = 0.0;
        for (std::size_t n = 0; n < obs.windows.size(); ++n) {
          num += w[n] * static_cast<double>(obs.windows[n].y);
          den += w[n] * static_cast<double>(obs.windows[n].y + obs.windows[n].length);
        }
        if (den > 0.0) next.params[0] = clamp_prob(num / den);
        return next;
      }
      double wx = 0.0, wlen = 0.0, wy = 0.0;
      for (std::size_t n = 0; n < obs.windows.size(); ++n) {
        wx += w[n] * obs.windows[n].x;
        wlen += w[n] * obs.windows[n].length;
        wy += w[n] * static_cast<double>(obs.windows[n].y);
      }
      if (wlen > 0.0) next.params[0] = clamp_prob(wx / wlen);
      if (wy > 0.0) next.params[1] = clamp_prob((wy - wx) / wy);
      return next;
    }
    case ObsKind::Daily: {
      double wsum = 0.0;
      for (double v : w) wsum += v;
      if (wsum <= 0.0) return cur;
      FitResult fit = fit_ml_weighted(cur.family, obs.daily, w);
      const double cur_ll = detail::weighted_log_likelihood(cur, obs.daily, w);
      return fit.log_likelihood >= cur_ll ? fit.model : cur;
    }
    case ObsKind::Dt: {
      double num = 0.0, den = 0.0;
      for (std::size_t n = 0; n < obs.durations.size(); ++n) {
        num += w[n];
        den += w[n] * static_cast<double>(obs.durations[n]);
      }
      if (den > 0.0) next.params[0] = clamp_prob(num / den);
      return next;
    }
  }
  return next;
}

}  // namespace detail

// Relabels states so per-day activity rates increase with the state index
// (state 0 = Inactive, highest = Active).
inline HmmModel canonicalize(const HmmModel& m) {
  const int d = m.d();
  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return m.state_rate(a) < m.state_rate(b); });
  HmmModel out = m;
  for (int a = 0; a < d; ++a) {
    out.emissions[static_cast<std::size_t>(a)] =
        m.emissions[static_cast<std::size_t>(order[static_cast<std::size_t>(a)])];
    out.initial[static_cast<std::size_t>(a)] =
        m.initial[static_cast<std::size_t>(order[static_cast<std::size_t>(a)])];
    for (int b = 0; b < d; ++b)
      out.transition.at(a, b) = m.transition.at(order[static_cast<std::size_t>(a)],
                                                order[static_cast<std::size_t>(b)]);
  }
  return out;
}

inline BaumWelchResult baum_welch(const HmmModel& init, const ObsSeq& obs, double tol,
                                  int max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("baum_welch: tol must be > 0");
  init.validate();
  BaumWelchResult res;
  res.model = init;
  const int d = init.d();
  const std::size_t dz = static_cast<std::size_t>(d);
  const std::size_t K = obs.size();

  double prev_ll = NEG_INF;
  for (int it = 0; it < max_iter; ++it) {
    const auto fb = forward_backward(res.model, obs);
    res.ll_trace.push_back(fb.log_likelihood);
    res.iterations = it + 1;
    if (prev_ll != NEG_INF) {
      const double rel = (fb.log_likelihood - prev_ll) / (1.0 + std::abs(prev_ll));
      if (std::abs(rel) < tol) {
        res.converged = true;
        break;
      }
    }
    prev_ll = fb.log_likelihood;

    // M-step: transitions from expected counts, initial from the first
    // posterior, emissions by posterior-weighted ML.
    HmmModel next = res.model;
    for (std::size_t i = 0; i < dz; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < dz; ++j) row += fb.expected_transitions[i * dz + j];
      if (row > 1e-12) {
        for (std::size_t j = 0; j < dz; ++j)
          next.transition.at(static_cast<int>(i), static_cast<int>(j)) =
              fb.expected_transitions[i * dz + j] / row;
      }
      // renormalize away float drift
      double s = 0.0;
      for (std::size_t j = 0; j < dz; ++j)
        s += next.transition.at(static_cast<int>(i), static_cast<int>(j));
      for (std::size_t j = 0; j < dz; ++j)
        next.transition.at(static_cast<int>(i), static_cast<int>(j)) /= s;
    }
    for (std::size_t j = 0; j < dz; ++j) next.initial[j] = fb.posteriors[0][j];
    {
      double s = std::accumulate(next.initial.begin(), next.initial.end(), 0.0);
      for (double& v : next.initial) v /= s;
    }

    std::vector<double> w(K);
    for (std::size_t j = 0; j < dz; ++j) {
      double mass = 0.0;
      for (std::size_t n = 0; n < K; ++n) {
        w[n] = fb.posteriors[n][j];
        mass += w[n];
      }
      if (mass < 1e-6) {
        res.state_collapsed = true;
        continue;  // keep the state's emission frozen
      }
      next.emissions[j] =
          detail::m_step_emission(res.model.emissions[j], obs, w);
    }
    res.model = next;
  }
  res.model = canonicalize(res.model);
  return res;
}

inline double rate_estimate(const InterArrivalSeries& ia) {
  if (ia.durations.empty()) throw DataError("rate_estimate: no durations");
  double m = 0.0;
  for (long d : ia.durations) m += static_cast<double>(d);
  m /= static_cast<double>(ia.durations.size());
  return 1.0 / m;
}

// ---- End-to-end state classification -----------------------------------

struct ClassifyOptions {
  double tol = 1e-8;
  int max_iter = 500;
  int starts = 1;          // extra Baum-Welch restarts with jittered inits
  std::uint64_t seed = 1;
  bool include_partial = false;
  int d = 2;
};

struct ClassifySummary {
  long n_windows = 0;        // windows used for training/decoding
  long n_windows_total = 0;  // including a ragged tail window, if any
  long n_spurt = 0;          // windows decoded Active (top state)
  double fractional_activity = 0.0;  // n_spurt * delta / n_days
  bool degenerate = false;
  bool converged = false;
  bool state_collapsed = false;
};

struct ClassifyResult {
  HmmModel model;
  StatePath path;
  WindowSeries windows;
  ClassifySummary summary;
  std::vector<double> ll_trace;
};

// Deterministic default initialization: global rate from inter-arrivals,
// states spread geometrically around it, sticky transitions, stationary
// initial distribution.
inline HmmModel default_init(const EventSeries& series, Family family, ObsKind kind,
                             int d = 2) {
  const auto ia = interarrivals(series);
  const double g_hat = rate_estimate(ia);
  std::vector<double> rates(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    // spread over [0.5, 2] x g_hat (log-uniform knots; d = 2 gives 0.5x / 2x)
    const double t = d == 1 ? 0.5 : static_cast<double>(j) / (d - 1);
    rates[static_cast<std::size_t>(j)] =
        std::clamp(g_hat * std::pow(2.0, 2.0 * t - 1.0), 1e-6, 1.0 - 1e-6);
  }

  double mu = 0.0;
  if (family == Family::HurdleGeometric) {
    double pos_sum = 0.0, pos_n = 0.0;
    for (long c : series.counts)
      if (c > 0) {
        pos_sum += static_cast<double>(c);
        pos_n += 1.0;
      }
    const double m_pos = pos_n > 0.0 ? pos_sum / pos_n : 1.0;
    mu = std::clamp((m_pos - 1.0) / m_pos, 0.0, 1.0 - 1e-6);
  }

  HmmModel m;
  m.obs_kind = kind;
  m.transition.d = d;
  m.transition.p.assign(static_cast<std::size_t>(d) * static_cast<std::size_t>(d), 0.0);
  const double off = 0.1 / std::max(1, d - 1);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m.transition.at(i, j) = i == j ? 0.9 : off;
  if (d == 1) m.transition.at(0, 0) = 1.0;
  for (int j = 0; j < d; ++j) {
    EmissionModel e;
    if (kind == ObsKind::Daily) {
      // daily mode: family as requested, moment-matched around the rate
      e.family = family;
      switch (family) {
        case Family::Poisson: e.params = {rates[static_cast<std::size_t>(j)]}; break;
        case Family::Geometric: e.params = {rates[static_cast<std::size_t>(j)]}; break;
        case Family::ShiftedZeta: e.params = {2.0 + 2.0 * (d - 1 - j)}; break;
        case Family::Polya:
          e.params = {1.0, std::clamp(rates[static_cast<std::size_t>(j)], 1e-6, 0.5)};
          break;
        case Family::HurdleZeta: e.params = {rates[static_cast<std::size_t>(j)], 2.0}; break;
        case Family::HurdleGeometric:
          e.params = {rates[static_cast<std::size_t>(j)], mu};
          break;
      }
    } else if (family == Family::HurdleGeometric && kind != ObsKind::Dt) {
      e.family = Family::HurdleGeometric;
      e.params = {rates[static_cast<std::size_t>(j)], mu};
    } else {
      e.family = Family::Geometric;
      e.params = {rates[static_cast<std::size_t>(j)]};
    }
    m.emissions.push_back(e);
  }
  m.initial = m.transition.stationary();
  return m;
}

inline ObsSeq build_observations(const EventSeries& series, int delta, ObsKind kind,
                                 bool include_partial = false) {
  switch (kind) {
    case ObsKind::Daily: return ObsSeq::from_daily(series);
    case ObsKind::Dt: return ObsSeq::from_interarrivals(interarrivals(series));
    default: return ObsSeq::from_windows(windowize(series, delta), kind, include_partial);
  }
}

inline ClassifyResult classify(const EventSeries& series, int delta, Family family,
                               ObsKind kind, const ClassifyOptions& opts = {}) {
  ClassifyResult out;
  out.windows = windowize(series, delta);

  if (series.total() == 0) {
    // No activity: a single effective state, everything Inactive.
    out.summary.degenerate = true;
    out.summary.converged = true;
    out.summary.n_windows_total = static_cast<long>(out.windows.windows.size());
    out.summary.n_windows = static_cast<long>(
        opts.include_partial ? out.windows.windows.size() : out.windows.n_complete());
    out.summary.n_spurt = 0;
    out.summary.fractional_activity = 0.0;
    out.model = HmmModel{};
    out.model.obs_kind = kind;
    out.model.transition = TransitionMatrix::two_state(0.5, 0.5);
    out.model.emissions = {EmissionModel{Family::Geometric, {1e-6}},
                           EmissionModel{Family::Geometric, {2e-6}}};
    out.model.initial = {0.5, 0.5};
    out.path.states.assign(out.summary.n_windows, 0);
    return out;
  }

  const ObsSeq obs = build_observations(series, delta, kind, opts.include_partial);
  const HmmModel init = default_init(series, family, kind, opts.d);

  BaumWelchResult best;
  bool have_best = false;
  for (int s = 0; s < std::max(1, opts.starts); ++s) {
    HmmModel start = init;
    if (s > 0) {
      Rng rng = Rng::stream(opts.seed, static_cast<std::uint64_t>(s));
      for (auto& e : start.emissions) {
        e.params[0] = std::clamp(e.params[0] * std::exp(1.2 * (rng.uniform() - 0.5)),
                                 1e-6, 1.0 - 1e-6);
        if (e.params.size() > 1)
          e.params[1] = std::clamp(e.params[1] * std::exp(1.2 * (rng.uniform() - 0.5)),
                                   0.0, 1.0 - 1e-6);
      }
    }
    BaumWelchResult r = baum_welch(start, obs, opts.tol, opts.max_iter);
    if (!have_best || r.ll_trace.back() > best.ll_trace.back()) {
      best = std::move(r);
      have_best = true;
    }
  }

  out.model = best.model;
  out.ll_trace = best.ll_trace;
  out.path = viterbi(out.model, obs);

  const int top = out.model.d() - 1;
  out.summary.n_windows_total = static_cast<long>(out.windows.windows.size());
  out.summary.n_windows = static_cast<long>(obs.size());
  out.summary.n_spurt = static_cast<long>(
      std::count(out.path.states.begin(), out.path.states.end(), top));
  switch (kind) {
    case ObsKind::Dt: {
      // no windows: report the fraction of days covered by Active gaps
      double active_days = 0.0;
      for (std::size_t k = 0; k < obs.durations.size(); ++k)
        if (out.path.states[k] == top) active_days += static_cast<double>(obs.durations[k]);
      out.summary.fractional_activity = active_days / static_cast<double>(series.n_days());
      break;
    }
    case ObsKind::Daily:
      out.summary.fractional_activity =
          static_cast<double>(out.summary.n_spurt) / static_cast<double>(series.n_days());
      break;
    default:
      out.summary.fractional_activity = static_cast<double>(out.summary.n_spurt) *
                                        static_cast<double>(delta) /
                                        static_cast<double>(series.n_days());
  }
  out.summary.converged = best.converged;
  out.summary.state_collapsed = best.state_collapsed;
  return out;
}

// Broadcasts window states to a per-day label sequence of length n_days.
// Days beyond the decoded windows (an excluded ragged tail) inherit the
// last decoded state.
inline std::vector<int> daily_states(const StatePath& path, const WindowSeries& ws,
                                     bool decoded_includes_partial) {
  std::vector<int> days(static_cast<std::size_t>(ws.n_days), 0);
  std::size_t k = 0;
  long day = 0;
  int last = 0;
  for (const auto& w : ws.windows) {
    const bool have_label = k < path.states.size() &&
                            (decoded_includes_partial || !w.partial);
    if (have_label) last = path.states[k++];
    for (int i = 0; i < w.length && day < ws.n_days; ++i, ++day)
      days[static_cast<std::size_t>(day)] = last;
  }
  return days;
}

}  // namespace ahmm
