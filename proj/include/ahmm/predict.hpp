#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ahmm/hmm.hpp"
#include "ahmm/parallel.hpp"
#include "ahmm/sehm.hpp"
#include "ahmm/series.hpp"

namespace ahmm {

enum class Estimator { Hmm, Sehm, Baseline };

inline const char* estimator_name(Estimator e) {
  switch (e) {
    case Estimator::Hmm: return "hmm";
    case Estimator::Sehm: return "sehm";
    case Estimator::Baseline: return "baseline";
  }
  return "?";
}

// Running sample mean of the observed durations.
inline double predict_baseline(std::span<const long> history) {
  if (history.empty()) throw std::invalid_argument("predict_baseline: empty history");
  double acc = 0.0;
  for (long d : history) acc += static_cast<double>(d);
  return acc / static_cast<double>(history.size());
}

// Forward-filtered conditional mean for a duration-mode HMM:
// beta_i = sum_j alpha_n(j) P(j -> i) / sum_j alpha_n(j), prediction
// sum_i beta_i / gamma_i (geometric state means). Maintains log alpha
// incrementally so rolling evaluation is O(d^2) per event.
class HmmDtPredictor {
 public:
  explicit HmmDtPredictor(const HmmModel& model) : model_(model) {
    if (model.obs_kind != ObsKind::Dt)
      throw std::invalid_argument("HmmDtPredictor: model must be duration-mode");
    model_.validate();
  }

  // Folds one observed duration into the forward state.
  void observe(long dt) {
    const int d = model_.d();
    std::vector<double> next(static_cast<std::size_t>(d), NEG_INF);
    for (int j = 0; j < d; ++j) {
      double acc = NEG_INF;
      if (!started_) {
        acc = model_.initial[static_cast<std::size_t>(j)] > 0.0
                  ? std::log(model_.initial[static_cast<std::size_t>(j)])
                  : NEG_INF;
      } else {
        for (int i = 0; i < d; ++i) {
          const double pij = model_.transition.at(i, j);
          if (pij > 0.0)
            acc = log_sum_exp(acc, log_alpha_[static_cast<std::size_t>(i)] + std::log(pij));
        }
      }
      next[static_cast<std::size_t>(j)] = acc + log_dt_pmf(j, dt);
    }
    if (log_sum_exp(next) == NEG_INF)
      throw DataError("HmmDtPredictor: duration has zero likelihood in every state");
    log_alpha_ = std::move(next);
    started_ = true;
  }

  // Weights beta_i over the next state; uniform over the initial
  // distribution before any observation.
  std::vector<double> next_state_weights() const {
    const int d = model_.d();
    std::vector<double> beta(static_cast<std::size_t>(d), 0.0);
    if (!started_) {
      beta = model_.initial;
      return beta;
    }
    const double norm = log_sum_exp(log_alpha_);
    for (int i = 0; i < d; ++i) {
      double acc = 0.0;
      for (int j = 0; j < d; ++j)
        acc += std::exp(log_alpha_[static_cast<std::size_t>(j)] - norm) *
               model_.transition.at(j, i);
      beta[static_cast<std::size_t>(i)] = acc;
    }
    return beta;
  }

  double predict_next() const {
    const auto beta = next_state_weights();
    double pred = 0.0;
    for (int i = 0; i < model_.d(); ++i)
      pred += beta[static_cast<std::size_t>(i)] /
              model_.emissions[static_cast<std::size_t>(i)].params[0];
    return pred;
  }

 private:
  double log_dt_pmf(int state, long dt) const {
    const double g = model_.emissions[static_cast<std::size_t>(state)].params[0];
    if (g <= 0.0 || g >= 1.0 || dt < 1) return NEG_INF;
    return std::log(g) + (static_cast<double>(dt) - 1.0) * std::log1p(-g);
  }

  HmmModel model_;
  std::vector<double> log_alpha_;
  bool started_ = false;
};

inline double predict_hmm(const HmmModel& model, std::span<const long> history) {
  HmmDtPredictor p(model);
  for (long dt : history) p.observe(dt);
  return p.predict_next();
}

// Symmetric mean absolute percentage error, Eq.-(9)-style, in [0, 100].
inline double smape(std::span<const double> actuals, std::span<const double> predictions) {
  if (actuals.size() != predictions.size())
    throw std::invalid_argument("smape: length mismatch");
  if (actuals.empty()) throw std::invalid_argument("smape: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < actuals.size(); ++i) {
    if (!(actuals[i] > 0.0) || !(predictions[i] > 0.0))
      throw std::invalid_argument("smape: values must be positive");
    acc += std::abs(actuals[i] - predictions[i]) / (actuals[i] + predictions[i]);
  }
  return 100.0 * acc / static_cast<double>(actuals.size());
}

struct PredictionRun {
  Estimator estimator = Estimator::Baseline;
  long train_horizon = 0;            // events used for training
  std::vector<double> predictions;   // one-step-ahead, events n+1..m
  std::vector<double> actuals;
  double smape_pct = 0.0;
  double train_log_likelihood = 0.0; // duration likelihood of the fit
  double aic = 0.0;                  // 2 * 4 - 2 * ll for HMM and SEHM
  bool fit_ok = true;
};

struct RollingEvalOptions {
  double tol = 1e-8;
  int max_iter = 2000;  // EM can crawl along flat ridges on short horizons
  std::uint64_t seed = 1;
  int sehm_starts = 4;
};

// One-step-ahead evaluation: parameters are fit once per training horizon
// on the first n durations and then held fixed while the filters roll
// through the remaining events.
inline std::vector<PredictionRun> rolling_eval(const EventSeries& series,
                                               const std::vector<Estimator>& estimators,
                                               const std::vector<long>& train_horizons,
                                               const RollingEvalOptions& opts = {}) {
  const InterArrivalSeries ia = interarrivals(series);
  const long m = static_cast<long>(ia.durations.size());
  std::vector<std::pair<Estimator, long>> jobs;
  for (Estimator e : estimators)
    for (long n : train_horizons) {
      if (n < 1 || n >= m)
        throw std::invalid_argument("rolling_eval: horizon " + std::to_string(n) +
                                    " outside [1, events-1]");
      jobs.emplace_back(e, n);
    }

  std::vector<PredictionRun> runs(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t jidx) {
    const auto [est, n] = jobs[jidx];
    PredictionRun run;
    run.estimator = est;
    run.train_horizon = n;
    const std::span<const long> dts(ia.durations);

    switch (est) {
      case Estimator::Baseline: {
        for (long k = n; k < m; ++k) {
          run.predictions.push_back(predict_baseline(dts.subspan(0, static_cast<std::size_t>(k))));
          run.actuals.push_back(static_cast<double>(dts[static_cast<std::size_t>(k)]));
        }
        break;
      }
      case Estimator::Hmm: {
        const EventSeries train = series_from_durations(std::vector<long>(ia.durations.begin(), ia.durations.begin() + n));
        const ObsSeq obs = ObsSeq::from_interarrivals(interarrivals(train));
        const HmmModel init = default_init(train, Family::Geometric, ObsKind::Dt);
        const BaumWelchResult bw = baum_welch(init, obs, opts.tol, opts.max_iter);
        run.fit_ok = bw.converged;
        run.train_log_likelihood = bw.ll_trace.back();
        run.aic = 2.0 * 4.0 - 2.0 * run.train_log_likelihood;
        HmmDtPredictor pred(bw.model);
        for (long k = 0; k < n; ++k) pred.observe(dts[static_cast<std::size_t>(k)]);
        for (long k = n; k < m; ++k) {
          run.predictions.push_back(pred.predict_next());
          run.actuals.push_back(static_cast<double>(dts[static_cast<std::size_t>(k)]));
          pred.observe(dts[static_cast<std::size_t>(k)]);
        }
        break;
      }
      case Estimator::Sehm: {
        // Train on the daily history up to the n-th activity day.
        const long t_n = ia.t[static_cast<std::size_t>(n - 1)];
        EventSeries train;
        train.start_day = series.start_day;
        train.counts.assign(series.counts.begin(), series.counts.begin() + t_n);
        SehmFitOptions fopt;
        fopt.timing_only = true;
        fopt.starts = opts.sehm_starts;
        fopt.seed = opts.seed;
        const SehmFit fit = sehm_fit(train, fopt);
        run.fit_ok = fit.converged;
        run.train_log_likelihood = fit.log_likelihood;
        run.aic = fit.aic;
        // Roll the excitation through the full daily record; predict at
        // the day after each activity day.
        SehmExcitation ex(fit.model);
        long events_seen = 0;
        for (long day = 0; day < series.n_days() && events_seen < m; ++day) {
          const bool active = series.counts[static_cast<std::size_t>(day)] > 0;
          ex.step(active);
          if (active) {
            ++events_seen;
            if (events_seen >= n && events_seen < m) {
              const double se = ex.se();
              run.predictions.push_back(1.0 / (-std::expm1(-(fit.model.b + se))));
              run.actuals.push_back(
                  static_cast<double>(dts[static_cast<std::size_t>(events_seen)]));
            }
          }
        }
        break;
      }
    }
    run.smape_pct = smape(run.actuals, run.predictions);
    runs[jidx] = std::move(run);
  });
  return runs;
}

}  // namespace ahmm
