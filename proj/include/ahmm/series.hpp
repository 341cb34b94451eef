#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ahmm/calendar.hpp"

namespace ahmm {

// Raised for inputs that violate data preconditions (distinct from
// config/usage errors so the CLI can map it to its own exit code).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One dated observation: `count` incidents attributed to `day`.
// Days need not be unique; ingest() sums duplicates.
struct EventRecord {
  Day day = 0;
  long count = 0;
};

struct DaySpan {
  Day first = 0;
  Day last = 0;  // inclusive
};

// Daily count series M_1..M_n covering every day of its span with no gaps.
struct EventSeries {
  Day start_day = 0;
  std::vector<long> counts;

  long n_days() const { return static_cast<long>(counts.size()); }
  Day day_at(long i) const { return start_day + i; }  // i is 0-based
  long total() const { return std::accumulate(counts.begin(), counts.end(), 0L); }
  long active_days() const {
    long n = 0;
    for (long c : counts) n += (c > 0);
    return n;
  }
};

// Per-window statistics over delta-day windows:
//   x = number of days with activity, y = total count in the window.
struct Window {
  int x = 0;
  long y = 0;
  int length = 0;   // actual window length (== delta except a ragged tail)
  bool partial = false;
};

struct WindowSeries {
  int delta = 0;
  Day start_day = 0;
  long n_days = 0;  // length of the underlying series
  std::vector<Window> windows;

  std::size_t n_complete() const {
    std::size_t n = 0;
    for (const auto& w : windows) n += !w.partial;
    return n;
  }
};

// Activity-day timeline: t[k] is the 1-based day index of the (k+1)-th
// day with activity; durations are successive differences with T_0 = 0.
struct InterArrivalSeries {
  std::vector<long> t;
  std::vector<long> durations;

  std::size_t n_events() const { return t.size(); }
};

// Builds a zero-filled daily series from dated records. Duplicate days are
// summed. Without an explicit span the series covers [first record, last
// record]. Records outside an explicit span are dropped; it is an error if
// that leaves none (while records were supplied).
inline EventSeries ingest(const std::vector<EventRecord>& records,
                          std::optional<DaySpan> span = std::nullopt) {
  for (const auto& r : records)
    if (r.count < 0) throw DataError("ingest: negative count");
  if (!span && records.empty())
    throw DataError("ingest: no records and no span given");

  DaySpan sp;
  if (span) {
    sp = *span;
    if (sp.last < sp.first) throw DataError("ingest: span end precedes start");
  } else {
    auto [lo, hi] = std::minmax_element(
        records.begin(), records.end(),
        [](const EventRecord& a, const EventRecord& b) { return a.day < b.day; });
    sp = {lo->day, hi->day};
  }

  EventSeries s;
  s.start_day = sp.first;
  s.counts.assign(static_cast<std::size_t>(sp.last - sp.first + 1), 0L);
  bool any_in_span = false;
  for (const auto& r : records) {
    if (r.day < sp.first || r.day > sp.last) continue;
    any_in_span = true;
    s.counts[static_cast<std::size_t>(r.day - sp.first)] += r.count;
  }
  if (!records.empty() && !any_in_span)
    throw DataError("ingest: span excludes all records");
  return s;
}

inline WindowSeries windowize(const EventSeries& series, int delta) {
  if (delta < 1) throw std::invalid_argument("windowize: delta must be >= 1");
  WindowSeries ws;
  ws.delta = delta;
  ws.start_day = series.start_day;
  ws.n_days = series.n_days();
  const long n = series.n_days();
  for (long start = 0; start < n; start += delta) {
    Window w;
    w.length = static_cast<int>(std::min<long>(delta, n - start));
    w.partial = w.length < delta;
    for (long i = start; i < start + w.length; ++i) {
      const long m = series.counts[static_cast<std::size_t>(i)];
      w.x += (m > 0);
      w.y += m;
    }
    ws.windows.push_back(w);
  }
  return ws;
}

inline InterArrivalSeries interarrivals(const EventSeries& series) {
  InterArrivalSeries ia;
  long prev = 0;  // T_0 = 0 convention
  for (long i = 0; i < series.n_days(); ++i) {
    if (series.counts[static_cast<std::size_t>(i)] > 0) {
      const long day_index = i + 1;  // 1-based
      ia.t.push_back(day_index);
      ia.durations.push_back(day_index - prev);
      prev = day_index;
    }
  }
  if (ia.t.empty()) throw DataError("interarrivals: series has no activity days");
  return ia;
}

// Lays a duration stream onto a daily timeline (count 1 per activity day).
inline EventSeries series_from_durations(const std::vector<long>& durations,
                                         Day start_day = 0) {
  if (durations.empty()) throw std::invalid_argument("series_from_durations: empty");
  long total = 0;
  for (long d : durations) {
    if (d < 1) throw std::invalid_argument("series_from_durations: durations must be >= 1");
    total += d;
  }
  EventSeries s;
  s.start_day = start_day;
  s.counts.assign(static_cast<std::size_t>(total), 0L);
  long day = 0;
  for (long d : durations) {
    day += d;
    s.counts[static_cast<std::size_t>(day - 1)] = 1;
  }
  return s;
}

// Augments `base` with `extra` records in deterministic batches: records are
// sorted by day and the j-th record within each calendar year joins batch j
// (one missing day of activity per year per step). steps <= 0 means one step
// per natural batch; when steps is smaller than that the final step absorbs
// the remainder, so the last series is always fully augmented. Returns the
// cumulative series after each step.
inline std::vector<EventSeries> merge_missing(const EventSeries& base,
                                              std::vector<EventRecord> extra,
                                              int steps = 0) {
  const Day first = base.start_day;
  const Day last = base.start_day + base.n_days() - 1;
  for (const auto& r : extra) {
    if (r.day < first || r.day > last)
      throw DataError("merge_missing: record outside base span");
    if (r.count < 0) throw DataError("merge_missing: negative count");
  }
  std::sort(extra.begin(), extra.end(), [](const EventRecord& a, const EventRecord& b) {
    return a.day != b.day ? a.day < b.day : a.count < b.count;
  });

  std::map<int, int> seen_per_year;
  std::vector<int> batch_of(extra.size(), 0);
  int natural_batches = extra.empty() ? 1 : 0;
  for (std::size_t i = 0; i < extra.size(); ++i) {
    const int rank = seen_per_year[year_of_day(extra[i].day)]++;
    batch_of[i] = rank;
    natural_batches = std::max(natural_batches, rank + 1);
  }
  const int n_steps = steps > 0 ? steps : natural_batches;

  std::vector<EventSeries> out;
  out.reserve(static_cast<std::size_t>(n_steps));
  EventSeries cur = base;
  for (int j = 0; j < n_steps; ++j) {
    for (std::size_t i = 0; i < extra.size(); ++i) {
      const int b = std::min(batch_of[i], n_steps - 1);
      if (b == j)
        cur.counts[static_cast<std::size_t>(extra[i].day - first)] += extra[i].count;
    }
    out.push_back(cur);
  }
  return out;
}

}  // namespace ahmm
