#pragma once

#include <stdexcept>
#include <vector>

#include "ahmm/emissions.hpp"
#include "ahmm/hmm.hpp"
#include "ahmm/rng.hpp"
#include "ahmm/series.hpp"

namespace ahmm {

namespace detail {

inline int draw_state(Rng& rng, std::span<const double> probs) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    acc += probs[j];
    if (u < acc) return static_cast<int>(j);
  }
  return static_cast<int>(probs.size()) - 1;
}

inline long draw_count(Rng& rng, const EmissionModel& e) {
  switch (e.family) {
    case Family::Geometric:
      return rng.geometric_count(e.params[0]);
    case Family::HurdleGeometric: {
      if (!rng.bernoulli(e.params[0])) return 0;
      // positive part: 1 + geometric count with ratio mu
      return 1 + rng.geometric_count(e.params[1]);
    }
    case Family::Poisson:
      return rng.poisson(e.params[0]);
    default:
      throw std::invalid_argument("simulate: unsupported emission family");
  }
}

}  // namespace detail

struct HmmDailySim {
  EventSeries series;
  std::vector<int> window_states;  // ground truth, one per delta-day block
};

// Draws a daily count series whose latent state is constant over
// delta-day blocks and follows the model's Markov chain across blocks.
inline HmmDailySim simulate_hmm_daily(const HmmModel& model, int delta, long n_days,
                                      std::uint64_t seed, Day start_day = 0) {
  model.validate();
  if (delta < 1) throw std::invalid_argument("simulate_hmm_daily: delta must be >= 1");
  Rng rng(seed);
  HmmDailySim out;
  out.series.start_day = start_day;
  out.series.counts.reserve(static_cast<std::size_t>(n_days));
  int state = detail::draw_state(rng, model.initial);
  for (long day = 0; day < n_days; ++day) {
    if (day > 0 && day % delta == 0) {
      std::vector<double> row(static_cast<std::size_t>(model.d()));
      for (int j = 0; j < model.d(); ++j) row[static_cast<std::size_t>(j)] = model.transition.at(state, j);
      state = detail::draw_state(rng, row);
    }
    if (day % delta == 0) out.window_states.push_back(state);
    out.series.counts.push_back(
        detail::draw_count(rng, model.emissions[static_cast<std::size_t>(state)]));
  }
  return out;
}

struct HmmDtSim {
  std::vector<long> durations;
  std::vector<int> states;  // one per event
};

// Event-level chain: state per event, duration geometric on {1,2,...} with
// the state's rate.
inline HmmDtSim simulate_hmm_dt(const HmmModel& model, std::size_t n_events,
                                std::uint64_t seed) {
  model.validate();
  Rng rng(seed);
  HmmDtSim out;
  out.durations.reserve(n_events);
  out.states.reserve(n_events);
  int state = detail::draw_state(rng, model.initial);
  for (std::size_t k = 0; k < n_events; ++k) {
    out.states.push_back(state);
    out.durations.push_back(
        rng.geometric_wait(model.emissions[static_cast<std::size_t>(state)].params[0]));
    std::vector<double> row(static_cast<std::size_t>(model.d()));
    for (int j = 0; j < model.d(); ++j) row[static_cast<std::size_t>(j)] = model.transition.at(state, j);
    state = detail::draw_state(rng, row);
  }
  return out;
}

}  // namespace ahmm
