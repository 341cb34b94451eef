#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ahmm/calendar.hpp"
#include "ahmm/emissions.hpp"
#include "ahmm/hmm.hpp"
#include "ahmm/ppstats.hpp"
#include "ahmm/sehm.hpp"
#include "ahmm/series.hpp"

namespace ahmm {

using json = nlohmann::ordered_json;

// Shortest round-trip decimal form; stable across reruns.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back = 0.0;
  std::sscanf(buf, "%lf", &back);
  if (back == v) {
    for (int prec = 1; prec <= 16; ++prec) {
      char shorter[32];
      std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
      std::sscanf(shorter, "%lf", &back);
      if (back == v) return shorter;
    }
  }
  return buf;
}

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hash_hex(const std::string& bytes) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

// ---- CSV ingestion --------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace detail

// Reads event records from CSV. Two layouts:
//   date,count  -- one row per day (or per batch; duplicates are summed)
//   date        -- one row per incident, count inferred
inline std::vector<EventRecord> read_events_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty CSV: " + path);
  const auto header = detail::split_csv_line(line);
  bool with_count = false;
  if (header.size() == 2 && header[0] == "date" && header[1] == "count")
    with_count = true;
  else if (!(header.size() == 1 && header[0] == "date"))
    throw DataError("CSV header must be 'date,count' or 'date': " + path);

  std::vector<EventRecord> records;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size())
      throw DataError(path + ":" + std::to_string(lineno) + ": wrong field count");
    EventRecord r;
    try {
      r.day = parse_iso_date(fields[0]);
    } catch (const std::invalid_argument& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (with_count) {
      try {
        r.count = std::stol(fields[1]);
      } catch (...) {
        throw DataError(path + ":" + std::to_string(lineno) + ": bad count");
      }
      if (r.count < 0)
        throw DataError(path + ":" + std::to_string(lineno) + ": negative count");
    } else {
      r.count = 1;
    }
    records.push_back(r);
  }
  if (records.empty()) throw DataError("CSV has no data rows: " + path);
  return records;
}

inline std::string write_series_csv(const EventSeries& s) {
  std::string out = "date,count\n";
  for (long i = 0; i < s.n_days(); ++i) {
    out += format_iso_date(s.day_at(i));
    out += ',';
    out += std::to_string(s.counts[static_cast<std::size_t>(i)]);
    out += '\n';
  }
  return out;
}

// ---- JSON conversions -------------------------------------------------------

inline json to_json(const EventSeries& s) {
  return json{{"start_day", format_iso_date(s.start_day)},
              {"n_days", s.n_days()},
              {"counts", s.counts}};
}

inline json to_json(const WindowSeries& ws) {
  json windows = json::array();
  for (const auto& w : ws.windows)
    windows.push_back(json{{"x", w.x}, {"y", w.y}, {"length", w.length}, {"partial", w.partial}});
  return json{{"delta", ws.delta},
              {"start_day", format_iso_date(ws.start_day)},
              {"n_days", ws.n_days},
              {"windows", windows}};
}

inline json to_json(const InterArrivalSeries& ia) {
  return json{{"t", ia.t}, {"durations", ia.durations}};
}

inline json to_json(const EmissionModel& e) {
  return json{{"family", family_name(e.family)}, {"params", e.params}};
}

inline json to_json(const FitResult& f) {
  return json{{"model", to_json(f.model)},
              {"log_likelihood", f.log_likelihood},
              {"aic", f.aic},
              {"n_params", f.n_params},
              {"boundary", f.boundary}};
}

inline json to_json(const HmmModel& m) {
  json rows = json::array();
  for (int i = 0; i < m.d(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.d(); ++j) row.push_back(m.transition.at(i, j));
    rows.push_back(row);
  }
  json emissions = json::array();
  for (const auto& e : m.emissions) emissions.push_back(to_json(e));
  return json{{"d", m.d()},
              {"transition", rows},
              {"emissions", emissions},
              {"initial", m.initial},
              {"obs_kind", obs_kind_name(m.obs_kind)}};
}

inline HmmModel hmm_from_json(const json& j) {
  HmmModel m;
  m.transition.d = j.at("d").get<int>();
  for (const auto& row : j.at("transition"))
    for (const auto& v : row) m.transition.p.push_back(v.get<double>());
  for (const auto& e : j.at("emissions")) {
    EmissionModel em;
    em.family = parse_family(e.at("family").get<std::string>());
    em.params = e.at("params").get<std::vector<double>>();
    m.emissions.push_back(em);
  }
  m.initial = j.at("initial").get<std::vector<double>>();
  m.obs_kind = parse_obs_kind(j.at("obs_kind").get<std::string>());
  m.validate();
  return m;
}

inline json to_json(const KsResult& k) {
  return json{{"n", k.n},
              {"statistic", k.statistic},
              {"alpha", k.alpha},
              {"critical", k.critical},
              {"p_value", k.p_value}};
}

inline json to_json(const SehmModel& m) {
  return json{{"b", m.b}, {"alpha", m.alpha}, {"omega", m.omega}, {"s", m.s}};
}

inline json to_json(const SehmFit& f) {
  return json{{"model", to_json(f.model)},
              {"log_likelihood", f.log_likelihood},
              {"aic", f.aic},
              {"converged", f.converged},
              {"boundary", f.boundary}};
}

// ---- Plot-ready CSV tables --------------------------------------------------

inline std::string write_ripley_csv(const RipleyCurve& c) {
  std::string out = "h,k_hat,reference,ci_lo,ci_hi\n";
  for (std::size_t i = 0; i < c.h.size(); ++i) {
    out += format_double(c.h[i]) + "," + format_double(c.k_hat[i]) + "," +
           format_double(c.reference[i]);
    if (!c.ci_lo.empty())
      out += "," + format_double(c.ci_lo[i]) + "," + format_double(c.ci_hi[i]);
    else
      out += ",,";
    out += '\n';
  }
  return out;
}

inline std::string write_state_path_csv(const StatePath& path, const WindowSeries& ws,
                                        bool decoded_includes_partial) {
  std::string out = "window,start_day,x,y,state,posterior_active\n";
  std::size_t k = 0;
  long day = 0;
  for (std::size_t w = 0; w < ws.windows.size(); ++w) {
    const auto& win = ws.windows[w];
    if (k < path.states.size() && (decoded_includes_partial || !win.partial)) {
      const double post_active =
          path.posteriors.empty() ? 0.0 : path.posteriors[k].back();
      out += std::to_string(w + 1) + "," + format_iso_date(ws.start_day + day) + "," +
             std::to_string(win.x) + "," + std::to_string(win.y) + "," +
             std::to_string(path.states[k]) + "," + format_double(post_active) + "\n";
      ++k;
    }
    day += win.length;
  }
  return out;
}

inline std::string write_qq_csv(const QqTable& t) {
  std::string out = "theoretical_q,sample_q\n";
  for (std::size_t i = 0; i < t.sample_q.size(); ++i)
    out += format_double(t.theoretical_q[i]) + "," + format_double(t.sample_q[i]) + "\n";
  return out;
}

// Table-2-shaped AIC table: per state, day-count histogram rows k = 0..4
// and >4, then AIC and parameter estimates per family.
inline std::string write_aic_table_csv(const std::vector<std::vector<AicRow>>& table,
                                       const std::vector<std::vector<long>>& data_by_state,
                                       const std::vector<Family>& families) {
  std::string out = "state,row";
  for (Family f : families) out += std::string(",") + family_name(f);
  out += ",observed\n";
  for (std::size_t st = 0; st < table.size(); ++st) {
    std::vector<long> observed(6, 0);
    for (long k : data_by_state[st]) ++observed[static_cast<std::size_t>(std::min<long>(k, 5))];
    for (int k = 0; k <= 5; ++k) {
      out += std::to_string(st) + "," + (k <= 4 ? std::to_string(k) : std::string(">4"));
      for (const auto& row : table[st]) {
        const double expected = k <= 4 ? row.expected[static_cast<std::size_t>(k)]
                                       : row.expected_gt4;
        out += "," + std::to_string(static_cast<long>(std::llround(expected)));
      }
      out += "," + std::to_string(observed[static_cast<std::size_t>(k)]) + "\n";
    }
    out += std::to_string(st) + ",aic";
    for (const auto& row : table[st]) out += "," + format_double(row.fit.aic);
    out += ",\n" + std::to_string(st) + ",params";
    for (const auto& row : table[st]) {
      out += ",";
      for (std::size_t p = 0; p < row.fit.model.params.size(); ++p) {
        if (p) out += ";";
        out += format_double(row.fit.model.params[p]);
      }
    }
    out += ",\n";
  }
  return out;
}

}  // namespace ahmm
