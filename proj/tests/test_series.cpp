#include <catch2/catch_amalgamated.hpp>

#include "ahmm/rng.hpp"
#include "ahmm/series.hpp"

using namespace ahmm;

TEST_CASE("ingest sums duplicates and zero-fills the span") {
  const EventSeries s = ingest({{3, 2}, {3, 1}}, DaySpan{1, 5});
  REQUIRE(s.start_day == 1);
  REQUIRE(s.counts == std::vector<long>{0, 0, 3, 0, 0});
}

TEST_CASE("ingest with empty records and a span gives an all-zero series") {
  const EventSeries s = ingest({}, DaySpan{1, 4});
  REQUIRE(s.counts == std::vector<long>{0, 0, 0, 0});
}

TEST_CASE("ingest without a span covers first..last record") {
  const EventSeries s = ingest({{1, 1}});
  REQUIRE(s.counts == std::vector<long>{1});
  REQUIRE(s.start_day == 1);
}

TEST_CASE("ingest errors") {
  REQUIRE_THROWS_AS(ingest({}), DataError);
  REQUIRE_THROWS_AS(ingest({{10, 1}}, DaySpan{1, 5}), DataError);  // span excludes all
  REQUIRE_THROWS_AS(ingest({{1, -1}}), DataError);
  REQUIRE_THROWS_AS(ingest({}, DaySpan{5, 1}), DataError);
}

TEST_CASE("windowize computes per-window statistics") {
  const EventSeries s{1, {0, 2, 0, 1, 1, 0}};
  const WindowSeries ws = windowize(s, 3);
  REQUIRE(ws.windows.size() == 2);
  CHECK(ws.windows[0].x == 1);
  CHECK(ws.windows[0].y == 2);
  CHECK(ws.windows[1].x == 2);
  CHECK(ws.windows[1].y == 2);
  CHECK_FALSE(ws.windows[0].partial);
  CHECK_FALSE(ws.windows[1].partial);
}

TEST_CASE("windowize on an all-zero series") {
  const WindowSeries ws = windowize(EventSeries{0, {0, 0, 0, 0}}, 2);
  REQUIRE(ws.windows.size() == 2);
  for (const auto& w : ws.windows) {
    CHECK(w.x == 0);
    CHECK(w.y == 0);
  }
}

TEST_CASE("windowize keeps and flags the ragged final window") {
  const WindowSeries ws = windowize(EventSeries{0, {1, 1, 1, 1, 1}}, 2);
  REQUIRE(ws.windows.size() == 3);
  CHECK(ws.windows[2].x == 1);
  CHECK(ws.windows[2].y == 1);
  CHECK(ws.windows[2].length == 1);
  CHECK(ws.windows[2].partial);
  CHECK(ws.n_complete() == 2);
  REQUIRE_THROWS_AS(windowize(EventSeries{0, {1}}, 0), std::invalid_argument);
}

TEST_CASE("interarrivals uses the T_0 = 0 convention") {
  const InterArrivalSeries a = interarrivals(EventSeries{0, {0, 1, 0, 0, 1}});
  CHECK(a.t == std::vector<long>{2, 5});
  CHECK(a.durations == std::vector<long>{2, 3});

  const InterArrivalSeries b = interarrivals(EventSeries{0, {1, 1}});
  CHECK(b.durations == std::vector<long>{1, 1});

  const InterArrivalSeries c = interarrivals(EventSeries{0, {0, 0, 3}});
  CHECK(c.durations == std::vector<long>{3});

  REQUIRE_THROWS_AS(interarrivals(EventSeries{0, {0, 0}}), DataError);
}

TEST_CASE("merge_missing augments cumulatively") {
  const EventSeries base{days_from_civil(2000, 1, 1), {1, 0, 0}};
  const auto steps =
      merge_missing(base, {{days_from_civil(2000, 1, 2), 1}}, 1);
  REQUIRE(steps.size() == 1);
  CHECK(steps[0].counts == std::vector<long>{1, 1, 0});

  const auto identity = merge_missing(base, {});
  REQUIRE(identity.size() == 1);
  CHECK(identity[0].counts == base.counts);

  const EventSeries base2{days_from_civil(2000, 1, 1), {1, 0}};
  const auto add = merge_missing(base2, {{days_from_civil(2000, 1, 1), 2}}, 1);
  CHECK(add[0].counts == std::vector<long>{3, 0});

  REQUIRE_THROWS_AS(merge_missing(base, {{days_from_civil(2001, 1, 1), 1}}, 1), DataError);
}

TEST_CASE("merge_missing batches one record per calendar year per step") {
  const Day start = days_from_civil(2000, 1, 1);
  EventSeries base{start, std::vector<long>(800, 0)};
  base.counts[0] = 1;
  // two records in 2000, one in 2001
  const std::vector<EventRecord> extra{{start + 10, 1},
                                       {start + 20, 2},
                                       {days_from_civil(2001, 2, 1), 3}};
  const auto out = merge_missing(base, extra);
  REQUIRE(out.size() == 2);  // max records in any year
  // step 1: first record of each year
  CHECK(out[0].counts[10] == 1);
  CHECK(out[0].counts[20] == 0);
  CHECK(out[0].total() == base.total() + 1 + 3);
  // step 2: everything
  CHECK(out[1].counts[20] == 2);
  CHECK(out[1].total() == base.total() + 6);
}

TEST_CASE("window sums conserve the daily series for every delta") {
  Rng rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    EventSeries s{0, {}};
    const long n = 1 + static_cast<long>(rng.index(200));
    for (long i = 0; i < n; ++i)
      s.counts.push_back(rng.bernoulli(0.3) ? static_cast<long>(rng.index(5)) + 1 : 0);
    long active = 0;
    for (long c : s.counts) active += c > 0;
    for (int delta : {1, 2, 3, 7, 15}) {
      const WindowSeries ws = windowize(s, delta);
      long sx = 0, sy = 0;
      for (const auto& w : ws.windows) {
        sx += w.x;
        sy += w.y;
      }
      CHECK(sy == s.total());
      CHECK(sx == active);
    }
  }
}

TEST_CASE("windowize with delta 1 reproduces the daily series") {
  const EventSeries s{0, {0, 3, 1, 0, 2}};
  const WindowSeries ws = windowize(s, 1);
  REQUIRE(ws.windows.size() == s.counts.size());
  for (std::size_t i = 0; i < ws.windows.size(); ++i) {
    CHECK(ws.windows[i].y == s.counts[i]);
    CHECK(ws.windows[i].x == (s.counts[i] > 0 ? 1 : 0));
  }
}

TEST_CASE("interarrivals of ingest is invariant to splitting same-day records") {
  const std::vector<EventRecord> merged{{2, 3}, {5, 1}};
  const std::vector<EventRecord> split{{2, 1}, {2, 1}, {2, 1}, {5, 1}};
  const auto a = interarrivals(ingest(merged, DaySpan{1, 6}));
  const auto b = interarrivals(ingest(split, DaySpan{1, 6}));
  CHECK(a.t == b.t);
  CHECK(a.durations == b.durations);
}

TEST_CASE("series_from_durations round-trips through interarrivals") {
  const std::vector<long> dts{2, 1, 4, 1, 7};
  const EventSeries s = series_from_durations(dts);
  const InterArrivalSeries ia = interarrivals(s);
  CHECK(ia.durations == dts);
  CHECK(s.n_days() == 15);
}
