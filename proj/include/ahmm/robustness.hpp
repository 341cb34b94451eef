#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "ahmm/hmm.hpp"
#include "ahmm/series.hpp"

namespace ahmm {

// Fraction of added counts relative to the baseline totals.
inline double frac_missing(const EventSeries& base, const EventSeries& augmented) {
  if (base.start_day != augmented.start_day || base.n_days() != augmented.n_days())
    throw std::invalid_argument("frac_missing: span mismatch");
  long base_total = 0, diff = 0;
  for (std::size_t i = 0; i < base.counts.size(); ++i) {
    if (augmented.counts[i] < base.counts[i])
      throw std::invalid_argument("frac_missing: augmented series below base");
    base_total += base.counts[i];
    diff += augmented.counts[i] - base.counts[i];
  }
  if (base_total == 0) throw DataError("frac_missing: baseline has no events");
  return static_cast<double>(diff) / static_cast<double>(base_total);
}

// Hamming fraction between two daily state label sequences.
inline double frac_state_changes(std::span<const int> base_states,
                                 std::span<const int> new_states) {
  if (base_states.size() != new_states.size() || base_states.empty())
    throw std::invalid_argument("frac_state_changes: length mismatch");
  long changed = 0;
  for (std::size_t i = 0; i < base_states.size(); ++i)
    changed += std::abs(new_states[i] - base_states[i]);
  return static_cast<double>(changed) / static_cast<double>(base_states.size());
}

struct RobustnessStep {
  double frac_missing = 0.0;
  double frac_changes = 0.0;
};

struct RobustnessCurve {
  std::vector<RobustnessStep> steps;
};

struct RobustnessConfig {
  int delta = 15;
  Family family = Family::Geometric;
  ObsKind obs_kind = ObsKind::XY;
  ClassifyOptions classify;
};

// Reclassifies after each augmentation batch and measures per-day state
// churn against the baseline classification. Every run reuses the same
// deterministic initialization so churn reflects the data, not optimizer
// randomness. Decoding includes the ragged tail window so every day
// carries a label.
inline RobustnessCurve robustness_sweep(const EventSeries& base,
                                        const std::vector<EventRecord>& extra, int steps,
                                        RobustnessConfig cfg = {}) {
  cfg.classify.include_partial = true;
  const ClassifyResult base_run =
      classify(base, cfg.delta, cfg.family, cfg.obs_kind, cfg.classify);
  const auto base_days = daily_states(base_run.path, base_run.windows, true);

  RobustnessCurve curve;
  for (const EventSeries& aug : merge_missing(base, extra, steps)) {
    const ClassifyResult run =
        classify(aug, cfg.delta, cfg.family, cfg.obs_kind, cfg.classify);
    const auto days = daily_states(run.path, run.windows, true);
    RobustnessStep st;
    st.frac_missing = frac_missing(base, aug);
    st.frac_changes = frac_state_changes(base_days, days);
    curve.steps.push_back(st);
  }
  return curve;
}

}  // namespace ahmm
