// Command-line front end: classify / diagnose / compare / simulate /
// robustness / merge over daily event-count series. Every command writes a
// reproducible bundle (manifest + artifacts) into --out; reruns with the
// same config and seed are byte-identical.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "ahmm/hmm.hpp"
#include "ahmm/io.hpp"
#include "ahmm/predict.hpp"
#include "ahmm/robustness.hpp"
#include "ahmm/sehm.hpp"
#include "ahmm/simulate.hpp"
#include "ahmm/version.hpp"

namespace fs = std::filesystem;
using ahmm::json;

namespace {

constexpr int EXIT_OK = 0;
constexpr int EXIT_CONFIG = 2;
constexpr int EXIT_DATA = 3;
constexpr int EXIT_NONCONVERGED = 4;

struct CommonConfig {
  std::string input;
  std::string out = "out";
  std::string format = "csv";
  std::uint64_t seed = 1;
  double tol = 1e-8;
  int max_iter = 2000;
};

struct Bundle {
  fs::path dir;
  json manifest;

  explicit Bundle(const std::string& out) : dir(out) {
    fs::create_directories(dir);
    manifest["version"] = ahmm::VERSION;
  }

  void add_file(const std::string& name, const std::string& content) {
    ahmm::write_file((dir / name).string(), content);
    manifest["artifacts"].push_back(name);
  }

  void finish(const std::string& command, const json& config,
              const std::string& input_bytes) {
    manifest["command"] = command;
    manifest["config"] = config;
    manifest["config_hash"] = ahmm::hash_hex(config.dump());
    manifest["input_hash"] = ahmm::hash_hex(input_bytes);
    ahmm::write_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");
  }
};

ahmm::EventSeries load_series(const std::string& path) {
  return ahmm::ingest(ahmm::read_events_csv(path));
}

std::string state_name(int s, int d) {
  if (d == 2) return s == 0 ? "inactive" : "active";
  return "state" + std::to_string(s);
}

// ---- classify ---------------------------------------------------------------

int cmd_classify(const CommonConfig& common, const std::vector<int>& deltas,
                 const std::string& family_s, const std::string& obs_s, int d,
                 int starts) {
  const ahmm::Family family = ahmm::parse_family(family_s);
  const ahmm::ObsKind obs = ahmm::parse_obs_kind(obs_s);
  const std::string input_bytes = ahmm::read_file(common.input);
  const ahmm::EventSeries series = load_series(common.input);

  Bundle bundle(common.out);
  json config{{"command", "classify"},       {"input", common.input},
              {"deltas", deltas},            {"family", family_s},
              {"obs", obs_s},                {"states", d},
              {"tol", common.tol},           {"max_iter", common.max_iter},
              {"starts", starts},            {"seed", common.seed},
              {"format", common.format}};

  bool all_converged = true;
  std::string summary_csv =
      "delta,family,obs,params,n_windows,n_spurt,fractional_activity,log_likelihood,"
      "converged,degenerate\n";
  json summary_json = json::array();

  for (int delta : deltas) {
    ahmm::ClassifyOptions opts;
    opts.tol = common.tol;
    opts.max_iter = common.max_iter;
    opts.seed = common.seed;
    opts.starts = starts;
    opts.d = d;
    const auto res = ahmm::classify(series, delta, family, obs, opts);
    all_converged = all_converged && (res.summary.converged || res.summary.degenerate);

    const std::string tag = "_d" + std::to_string(delta);
    bundle.add_file("model" + tag + ".json", ahmm::to_json(res.model).dump(2) + "\n");
    bundle.add_file("states" + tag + ".csv",
                    ahmm::write_state_path_csv(res.path, res.windows, false));

    std::string params;
    for (std::size_t j = 0; j < res.model.emissions.size(); ++j) {
      for (std::size_t p = 0; p < res.model.emissions[j].params.size(); ++p) {
        if (!params.empty()) params += ";";
        params += ahmm::format_double(res.model.emissions[j].params[p]);
      }
    }
    const double ll = res.ll_trace.empty() ? 0.0 : res.ll_trace.back();
    summary_csv += std::to_string(delta) + "," + family_s + "," + obs_s + "," + params +
                   "," + std::to_string(res.summary.n_windows) + "," +
                   std::to_string(res.summary.n_spurt) + "," +
                   ahmm::format_double(res.summary.fractional_activity) + "," +
                   ahmm::format_double(ll) + "," +
                   (res.summary.converged ? "true" : "false") + "," +
                   (res.summary.degenerate ? "true" : "false") + "\n";
    summary_json.push_back(json{{"delta", delta},
                                {"model", ahmm::to_json(res.model)},
                                {"n_windows", res.summary.n_windows},
                                {"n_spurt", res.summary.n_spurt},
                                {"fractional_activity", res.summary.fractional_activity},
                                {"log_likelihood", ll},
                                {"converged", res.summary.converged},
                                {"degenerate", res.summary.degenerate}});
    if (res.summary.degenerate)
      bundle.manifest["warnings"].push_back("delta " + std::to_string(delta) +
                                            ": degenerate all-zero input");
  }

  if (common.format == "json")
    bundle.add_file("summary.json", summary_json.dump(2) + "\n");
  else
    bundle.add_file("summary.csv", summary_csv);
  bundle.finish("classify", config, input_bytes);
  return all_converged ? EXIT_OK : EXIT_NONCONVERGED;
}

// ---- diagnose ---------------------------------------------------------------

int cmd_diagnose(const CommonConfig& common, int delta, const std::string& family_s,
                 const std::string& obs_s, double alpha, double h_max, int resamples,
                 long beta_active, long beta_inactive) {
  const ahmm::Family family = ahmm::parse_family(family_s);
  const ahmm::ObsKind obs = ahmm::parse_obs_kind(obs_s);
  const std::string input_bytes = ahmm::read_file(common.input);
  const ahmm::EventSeries series = load_series(common.input);

  Bundle bundle(common.out);
  json config{{"command", "diagnose"}, {"input", common.input}, {"delta", delta},
              {"family", family_s},    {"obs", obs_s},          {"alpha", alpha},
              {"h_max", h_max},        {"resamples", resamples},
              {"beta_active", beta_active}, {"beta_inactive", beta_inactive},
              {"tol", common.tol},     {"max_iter", common.max_iter},
              {"seed", common.seed},   {"format", common.format}};

  ahmm::ClassifyOptions opts;
  opts.tol = common.tol;
  opts.max_iter = common.max_iter;
  opts.seed = common.seed;
  opts.include_partial = true;  // every day needs a state label
  const auto res = ahmm::classify(series, delta, family, obs, opts);
  const auto day_states = ahmm::daily_states(res.path, res.windows, true);
  const auto ia = ahmm::interarrivals(series);

  std::vector<double> h_grid;
  for (double h = 1.0; h <= h_max; h += 1.0) h_grid.push_back(h);

  // full-series curves: naive and reweighted (p_i from the decoded state)
  bundle.add_file("ripley_full_naive.csv",
                  ahmm::write_ripley_csv(ahmm::ripley_naive(ia, series.n_days(), h_grid)));
  {
    std::vector<double> p_hat;
    for (long t : ia.t)
      p_hat.push_back(std::clamp(
          res.model.state_rate(day_states[static_cast<std::size_t>(t - 1)]), 1e-6, 1.0));
    bundle.add_file("ripley_full_corrected.csv",
                    ahmm::write_ripley_csv(
                        ahmm::ripley_corrected(ia, series.n_days(), h_grid, p_hat)));
  }

  json ks_json;
  const int d = res.model.d();
  for (int s = 0; s < d; ++s) {
    const std::string name = state_name(s, d);
    // durations whose spanned interval lies in state s (both endpoints)
    std::vector<double> dur_state;
    for (std::size_t k = 1; k < ia.t.size(); ++k) {
      const int s0 = day_states[static_cast<std::size_t>(ia.t[k - 1] - 1)];
      const int s1 = day_states[static_cast<std::size_t>(ia.t[k] - 1)];
      if (s0 == s && s1 == s)
        dur_state.push_back(static_cast<double>(ia.durations[k]));
    }
    json ks_entry;
    ks_entry["n_total"] = dur_state.size();
    const long beta = (s == d - 1) ? beta_active : beta_inactive;
    if (beta > 0) {
      std::erase_if(dur_state, [&](double v) { return v > static_cast<double>(beta); });
      ks_entry["beta"] = beta;
    }
    if (dur_state.size() >= 2) {
      const auto ks = ahmm::ks_exponential(dur_state, alpha);
      ks_entry.update(ahmm::to_json(ks));
      double mean_dur = 0.0;
      for (double v : dur_state) mean_dur += v;
      mean_dur /= static_cast<double>(dur_state.size());
      bundle.add_file("qq_dt_" + name + ".csv",
                      ahmm::write_qq_csv(ahmm::qq_data(
                          dur_state, ahmm::QqTheoretical::Exponential, 1.0 / mean_dur)));
    } else {
      ks_entry["error"] = "fewer than 2 in-state durations";
    }
    ks_json[name] = ks_entry;

    // per-state sub-series Ripley with bootstrap band
    try {
      const auto sub = ahmm::subseries(series, day_states, s, common.seed);
      const auto sub_ia = ahmm::interarrivals(sub.series);
      if (sub_ia.t.size() >= 2) {
        auto builder = [&h_grid](const ahmm::InterArrivalSeries& x, long span) {
          const double rate = static_cast<double>(x.t.size()) / static_cast<double>(span);
          const std::vector<double> p_hat(x.t.size(), std::clamp(rate, 1e-6, 1.0));
          return ahmm::ripley_corrected(x, span, h_grid, p_hat);
        };
        const auto curve = ahmm::bootstrap_band(builder, sub_ia, sub.series.n_days(),
                                                resamples, 1.0 - alpha, common.seed);
        bundle.add_file("ripley_" + name + ".csv", ahmm::write_ripley_csv(curve));
      }
    } catch (const ahmm::DataError& e) {
      bundle.manifest["warnings"].push_back(name + std::string(": ") + e.what());
    }
  }
  bundle.add_file("ks.json", ks_json.dump(2) + "\n");

  // Q-Q of per-window activity-day counts against Poisson(delta * rate)
  {
    const auto ws = ahmm::windowize(series, delta);
    std::vector<double> xs;
    for (const auto& w : ws.windows)
      if (!w.partial) xs.push_back(static_cast<double>(w.x));
    const double rate = ahmm::rate_estimate(ia);
    if (xs.size() >= 2)
      bundle.add_file("qq_window_x.csv",
                      ahmm::write_qq_csv(ahmm::qq_data(
                          xs, ahmm::QqTheoretical::Poisson, delta * rate)));
  }

  // AIC comparison of the six families per state
  {
    std::vector<std::vector<long>> data_by_state(static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < series.counts.size(); ++i)
      data_by_state[static_cast<std::size_t>(day_states[i])].push_back(series.counts[i]);
    const std::vector<ahmm::Family> families{
        ahmm::Family::Poisson,     ahmm::Family::ShiftedZeta,
        ahmm::Family::Geometric,   ahmm::Family::Polya,
        ahmm::Family::HurdleZeta,  ahmm::Family::HurdleGeometric};
    const auto table = ahmm::aic_table(data_by_state, families);
    bundle.add_file("aic_table.csv",
                    ahmm::write_aic_table_csv(table, data_by_state, families));
  }

  bundle.add_file("model.json", ahmm::to_json(res.model).dump(2) + "\n");
  bundle.finish("diagnose", config, input_bytes);
  return res.summary.converged || res.summary.degenerate ? EXIT_OK : EXIT_NONCONVERGED;
}

// ---- compare ----------------------------------------------------------------

int cmd_compare(const CommonConfig& common, const std::vector<long>& horizons,
                const std::vector<std::string>& estimator_names) {
  const std::string input_bytes = ahmm::read_file(common.input);
  const ahmm::EventSeries series = load_series(common.input);

  std::vector<ahmm::Estimator> estimators;
  for (const auto& name : estimator_names) {
    if (name == "hmm") estimators.push_back(ahmm::Estimator::Hmm);
    else if (name == "sehm") estimators.push_back(ahmm::Estimator::Sehm);
    else if (name == "baseline") estimators.push_back(ahmm::Estimator::Baseline);
    else throw std::invalid_argument("unknown estimator: " + name);
  }

  Bundle bundle(common.out);
  json config{{"command", "compare"},   {"input", common.input},
              {"horizons", horizons},   {"estimators", estimator_names},
              {"tol", common.tol},      {"max_iter", common.max_iter},
              {"seed", common.seed},    {"format", common.format}};

  ahmm::RollingEvalOptions opts;
  opts.tol = common.tol;
  opts.max_iter = common.max_iter;
  opts.seed = common.seed;
  const auto runs = ahmm::rolling_eval(series, estimators, horizons, opts);

  bool all_ok = true;
  std::map<long, std::map<std::string, const ahmm::PredictionRun*>> by_horizon;
  for (const auto& run : runs) {
    by_horizon[run.train_horizon][ahmm::estimator_name(run.estimator)] = &run;
    all_ok = all_ok && run.fit_ok;
    std::string trace = "event,actual,predicted\n";
    for (std::size_t i = 0; i < run.predictions.size(); ++i)
      trace += std::to_string(run.train_horizon + static_cast<long>(i) + 1) + "," +
               ahmm::format_double(run.actuals[i]) + "," +
               ahmm::format_double(run.predictions[i]) + "\n";
    bundle.add_file("trace_" + std::string(ahmm::estimator_name(run.estimator)) + "_n" +
                        std::to_string(run.train_horizon) + ".csv",
                    trace);
  }

  std::string table = "n";
  for (const char* metric : {"aic", "smape"})
    for (const auto& name : estimator_names)
      if (!(std::string(metric) == "aic" && name == "baseline"))
        table += std::string(",") + metric + "_" + name;
  table += "\n";
  json table_json = json::array();
  for (const auto& [n, row] : by_horizon) {
    table += std::to_string(n);
    json jrow{{"n", n}};
    for (const char* metric : {"aic", "smape"}) {
      for (const auto& name : estimator_names) {
        if (std::string(metric) == "aic" && name == "baseline") continue;
        const auto it = row.find(name);
        const double v = it == row.end() ? 0.0
                         : std::string(metric) == "aic" ? it->second->aic
                                                        : it->second->smape_pct;
        table += "," + ahmm::format_double(v);
        jrow[std::string(metric) + "_" + name] = v;
      }
    }
    table += "\n";
    table_json.push_back(jrow);
  }
  if (common.format == "json")
    bundle.add_file("smape_aic.json", table_json.dump(2) + "\n");
  else
    bundle.add_file("smape_aic.csv", table);
  bundle.finish("compare", config, input_bytes);
  return all_ok ? EXIT_OK : EXIT_NONCONVERGED;
}

// ---- simulate ---------------------------------------------------------------

struct SimulateConfig {
  std::string model = "hmm";
  std::string family = "geom";
  std::string obs = "daily";
  long days = 3000;
  long events = 1000;
  int delta = 15;
  double gamma0 = 0.09, gamma1 = 0.36, mu0 = 0.05, mu1 = 0.31, p0 = 0.1, q0 = 0.1;
  double sehm_b = 0.1, sehm_alpha = 0.5, sehm_omega = 0.2, sehm_s = 2.5;
};

int cmd_simulate(const CommonConfig& common, const SimulateConfig& sim) {
  Bundle bundle(common.out);
  json config{{"command", "simulate"}, {"model", sim.model},   {"days", sim.days},
              {"events", sim.events},  {"delta", sim.delta},   {"family", sim.family},
              {"gamma0", sim.gamma0},  {"gamma1", sim.gamma1}, {"mu0", sim.mu0},
              {"mu1", sim.mu1},        {"p0", sim.p0},         {"q0", sim.q0},
              {"sehm_b", sim.sehm_b},  {"sehm_alpha", sim.sehm_alpha},
              {"sehm_omega", sim.sehm_omega}, {"sehm_s", sim.sehm_s},
              {"obs", sim.obs},        {"seed", common.seed}};

  const ahmm::Day start = ahmm::parse_iso_date("2000-01-01");
  json gen;
  if (sim.model == "hmm") {
    ahmm::HmmModel m;
    m.transition = ahmm::TransitionMatrix::two_state(sim.p0, sim.q0);
    const ahmm::Family family = ahmm::parse_family(sim.family);
    if (family == ahmm::Family::HurdleGeometric) {
      m.emissions = {ahmm::EmissionModel{family, {sim.gamma0, sim.mu0}},
                     ahmm::EmissionModel{family, {sim.gamma1, sim.mu1}}};
    } else {
      m.emissions = {ahmm::EmissionModel{family, {sim.gamma0}},
                     ahmm::EmissionModel{family, {sim.gamma1}}};
    }
    m.initial = m.transition.stationary();
    gen["model"] = ahmm::to_json(m);
    if (sim.obs == "dt") {
      m.obs_kind = ahmm::ObsKind::Dt;
      const auto out = ahmm::simulate_hmm_dt(m, static_cast<std::size_t>(sim.events),
                                             common.seed);
      bundle.add_file("data.csv", ahmm::write_series_csv(
                                      ahmm::series_from_durations(out.durations, start)));
      std::string states = "event,duration,state\n";
      for (std::size_t k = 0; k < out.durations.size(); ++k)
        states += std::to_string(k + 1) + "," + std::to_string(out.durations[k]) + "," +
                  std::to_string(out.states[k]) + "\n";
      bundle.add_file("true_states.csv", states);
    } else {
      m.obs_kind = ahmm::ObsKind::Daily;
      const auto out = ahmm::simulate_hmm_daily(m, sim.delta, sim.days, common.seed, start);
      bundle.add_file("data.csv", ahmm::write_series_csv(out.series));
      std::string states = "window,state\n";
      for (std::size_t k = 0; k < out.window_states.size(); ++k)
        states += std::to_string(k + 1) + "," + std::to_string(out.window_states[k]) + "\n";
      bundle.add_file("true_states.csv", states);
    }
  } else {
    const ahmm::SehmModel m{sim.sehm_b, sim.sehm_alpha, sim.sehm_omega, sim.sehm_s};
    gen["model"] = ahmm::to_json(m);
    bundle.add_file("data.csv", ahmm::write_series_csv(
                                    ahmm::simulate_sehm(m, sim.days, common.seed, start)));
  }
  gen["seed"] = common.seed;
  bundle.add_file("gen_params.json", gen.dump(2) + "\n");
  bundle.finish("simulate", config, "");
  return EXIT_OK;
}

// ---- robustness -------------------------------------------------------------

int cmd_robustness(const CommonConfig& common, const std::string& extra_path, int steps,
                   int delta, const std::string& family_s, const std::string& obs_s) {
  const std::string input_bytes =
      ahmm::read_file(common.input) + "\x1e" + ahmm::read_file(extra_path);
  const ahmm::EventSeries base = load_series(common.input);
  const auto extra = ahmm::read_events_csv(extra_path);

  Bundle bundle(common.out);
  json config{{"command", "robustness"}, {"input", common.input},
              {"extra", extra_path},     {"steps", steps},
              {"delta", delta},          {"family", family_s},
              {"obs", obs_s},            {"tol", common.tol},
              {"max_iter", common.max_iter}, {"seed", common.seed},
              {"format", common.format}};

  ahmm::RobustnessConfig cfg;
  cfg.delta = delta;
  cfg.family = ahmm::parse_family(family_s);
  cfg.obs_kind = ahmm::parse_obs_kind(obs_s);
  cfg.classify.tol = common.tol;
  cfg.classify.max_iter = common.max_iter;
  cfg.classify.seed = common.seed;
  const auto curve = ahmm::robustness_sweep(base, extra, steps, cfg);

  std::string csv = "step,frac_missing,frac_state_changes\n";
  for (std::size_t j = 0; j < curve.steps.size(); ++j)
    csv += std::to_string(j + 1) + "," + ahmm::format_double(curve.steps[j].frac_missing) +
           "," + ahmm::format_double(curve.steps[j].frac_changes) + "\n";
  bundle.add_file("robustness.csv", csv);
  bundle.finish("robustness", config, input_bytes);
  return EXIT_OK;
}

// ---- merge ------------------------------------------------------------------

int cmd_merge(const CommonConfig& common, const std::string& extra_path, int steps) {
  const std::string input_bytes =
      ahmm::read_file(common.input) + "\x1e" + ahmm::read_file(extra_path);
  const ahmm::EventSeries base = load_series(common.input);
  const auto extra = ahmm::read_events_csv(extra_path);

  Bundle bundle(common.out);
  json config{{"command", "merge"}, {"input", common.input}, {"extra", extra_path},
              {"steps", steps},     {"seed", common.seed}};

  const auto merged = ahmm::merge_missing(base, extra, steps);
  for (std::size_t j = 0; j < merged.size(); ++j)
    bundle.add_file("merged_step" + std::to_string(j + 1) + ".csv",
                    ahmm::write_series_csv(merged[j]));
  bundle.finish("merge", config, input_bytes);
  return EXIT_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hidden-Markov activity-profile modeling of dated event-count series"};
  app.require_subcommand(1);

  CommonConfig common;
  auto add_common = [&](CLI::App* sub, bool needs_input = true) {
    if (needs_input)
      sub->add_option("--input", common.input, "input CSV (date,count or date)")
          ->required();
    sub->add_option("--out", common.out, "output bundle directory");
    sub->add_option("--format", common.format, "summary format")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--seed", common.seed, "random seed");
    sub->add_option("--tol", common.tol, "fit tolerance");
    sub->add_option("--max-iter", common.max_iter, "fit iteration cap");
  };
  const std::vector<std::string> family_names{"poisson", "szeta", "geom",
                                              "polya",   "hzeta", "hgeom"};

  auto* classify = app.add_subcommand("classify", "fit the HMM and decode regimes");
  std::vector<int> deltas{15};
  std::string family = "geom", obs = "xy";
  int d_states = 2, starts = 1;
  add_common(classify);
  classify->add_option("--delta", deltas, "window length(s) in days");
  classify->add_option("--family", family, "emission family")
      ->check(CLI::IsMember(family_names));
  classify->add_option("--obs", obs, "observation kind")
      ->check(CLI::IsMember({"x", "y", "xy", "daily", "dt"}));
  classify->add_option("--states", d_states, "number of latent states")
      ->check(CLI::Range(1, 8));
  classify->add_option("--starts", starts, "extra jittered restarts");

  auto* diagnose = app.add_subcommand("diagnose", "point-process diagnostics");
  int dg_delta = 15, resamples = 1000;
  double alpha = 0.05, h_max = 50.0;
  long beta_active = 0, beta_inactive = 0;
  std::string dg_family = "geom", dg_obs = "xy";
  add_common(diagnose);
  diagnose->add_option("--delta", dg_delta, "window length in days");
  diagnose->add_option("--family", dg_family, "emission family")
      ->check(CLI::IsMember(family_names));
  diagnose->add_option("--obs", dg_obs, "observation kind")
      ->check(CLI::IsMember({"x", "y", "xy", "daily", "dt"}));
  diagnose->add_option("--alpha", alpha, "significance level");
  diagnose->add_option("--h-max", h_max, "largest Ripley distance");
  diagnose->add_option("--resamples", resamples, "bootstrap resamples (0 = no bands)");
  diagnose->add_option("--ks-beta-active", beta_active,
                       "duration cap for the Active KS sample (0 = none)");
  diagnose->add_option("--ks-beta-inactive", beta_inactive,
                       "duration cap for the Inactive KS sample (0 = none)");

  auto* compare = app.add_subcommand("compare", "rolling prediction and AIC comparison");
  std::vector<long> horizons{100};
  std::vector<std::string> estimators{"hmm", "sehm", "baseline"};
  add_common(compare);
  compare->add_option("--horizons", horizons, "training horizons (events)");
  compare->add_option("--estimators", estimators, "estimators to run")
      ->check(CLI::IsMember({"hmm", "sehm", "baseline"}));

  auto* simulate = app.add_subcommand("simulate", "draw synthetic data");
  SimulateConfig sim;
  add_common(simulate, false);
  simulate->add_option("--model", sim.model, "generator")
      ->check(CLI::IsMember({"hmm", "sehm"}));
  simulate->add_option("--obs", sim.obs, "hmm output: daily series or dt stream")
      ->check(CLI::IsMember({"daily", "dt"}));
  simulate->add_option("--days", sim.days, "series length in days");
  simulate->add_option("--events", sim.events, "events for dt streams");
  simulate->add_option("--delta", sim.delta, "state block length in days");
  simulate->add_option("--family", sim.family, "emission family")
      ->check(CLI::IsMember({"poisson", "geom", "hgeom"}));
  simulate->add_option("--gamma0", sim.gamma0, "Inactive rate");
  simulate->add_option("--gamma1", sim.gamma1, "Active rate");
  simulate->add_option("--mu0", sim.mu0, "Inactive hurdle ratio");
  simulate->add_option("--mu1", sim.mu1, "Active hurdle ratio");
  simulate->add_option("--p0", sim.p0, "P(Inactive -> Active)");
  simulate->add_option("--q0", sim.q0, "P(Active -> Inactive)");
  simulate->add_option("--sehm-b", sim.sehm_b, "SEHM baseline");
  simulate->add_option("--sehm-alpha", sim.sehm_alpha, "SEHM excitation");
  simulate->add_option("--sehm-omega", sim.sehm_omega, "SEHM decay");
  simulate->add_option("--sehm-s", sim.sehm_s, "SEHM zeta exponent");

  auto* robustness = app.add_subcommand("robustness", "missing-data sensitivity sweep");
  std::string extra_path;
  int steps = 0, rb_delta = 15;
  std::string rb_family = "geom", rb_obs = "xy";
  add_common(robustness);
  robustness->add_option("--extra", extra_path, "augmentation records CSV")->required();
  robustness->add_option("--steps", steps, "augmentation steps (0 = one per year-rank)");
  robustness->add_option("--delta", rb_delta, "window length in days");
  robustness->add_option("--family", rb_family, "emission family")
      ->check(CLI::IsMember(family_names));
  robustness->add_option("--obs", rb_obs, "observation kind")
      ->check(CLI::IsMember({"x", "y", "xy", "daily"}));

  auto* merge = app.add_subcommand("merge", "emit cumulative augmented series");
  std::string mg_extra;
  int mg_steps = 0;
  add_common(merge);
  merge->add_option("--extra", mg_extra, "augmentation records CSV")->required();
  merge->add_option("--steps", mg_steps, "augmentation steps (0 = one per year-rank)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? EXIT_OK : EXIT_CONFIG;
  }

  try {
    if (classify->parsed())
      return cmd_classify(common, deltas, family, obs, d_states, starts);
    if (diagnose->parsed())
      return cmd_diagnose(common, dg_delta, dg_family, dg_obs, alpha, h_max, resamples,
                          beta_active, beta_inactive);
    if (compare->parsed()) return cmd_compare(common, horizons, estimators);
    if (simulate->parsed()) return cmd_simulate(common, sim);
    if (robustness->parsed())
      return cmd_robustness(common, extra_path, steps, rb_delta, rb_family, rb_obs);
    if (merge->parsed()) return cmd_merge(common, mg_extra, mg_steps);
  } catch (const ahmm::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return EXIT_DATA;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return EXIT_CONFIG;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return EXIT_CONFIG;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return EXIT_DATA;
  }
  return EXIT_CONFIG;
}
