#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ahmm/hmm.hpp"
#include "ahmm/rng.hpp"
#include "ahmm/simulate.hpp"

using namespace ahmm;

namespace {

// Emission log-probability recomputed from the public window densities so
// the oracle does not share the HMM's emission table code path.
double oracle_log_obs(const HmmModel& m, int state, const ObsSeq& obs, std::size_t n) {
  const EmissionModel& e = m.emissions[static_cast<std::size_t>(state)];
  switch (obs.kind) {
    case ObsKind::X:
      return std::log(window_pmf_x(e.params[0], obs.windows[n].length, obs.windows[n].x));
    case ObsKind::XY:
      return std::log(window_pmf_joint(e, obs.windows[n].length, obs.windows[n].x,
                                       obs.windows[n].y));
    case ObsKind::Daily:
      return e.log_pmf(obs.daily[n]);
    case ObsKind::Dt: {
      const double g = e.params[0];
      return std::log(g) + (static_cast<double>(obs.durations[n]) - 1.0) * std::log1p(-g);
    }
    default:
      FAIL("oracle does not cover this observation kind");
  }
  return NEG_INF;
}

struct EnumerationOracle {
  double log_likelihood = NEG_INF;
  std::vector<std::vector<double>> posteriors;
  std::vector<int> best_path;
  double best_log_prob = NEG_INF;
  double second_log_prob = NEG_INF;
};

// Exhausts all d^K state paths.
EnumerationOracle enumerate_paths(const HmmModel& m, const ObsSeq& obs) {
  const std::size_t K = obs.size();
  const int d = m.d();
  EnumerationOracle out;
  out.posteriors.assign(K, std::vector<double>(static_cast<std::size_t>(d), 0.0));
  std::vector<int> path(K, 0);
  std::vector<double> weights;
  std::vector<std::vector<int>> paths;
  for (;;) {
    double lp = std::log(m.initial[static_cast<std::size_t>(path[0])]) +
                oracle_log_obs(m, path[0], obs, 0);
    for (std::size_t n = 1; n < K; ++n)
      lp += std::log(m.transition.at(path[n - 1], path[n])) +
            oracle_log_obs(m, path[n], obs, n);
    out.log_likelihood = log_sum_exp(out.log_likelihood, lp);
    if (lp > out.best_log_prob) {
      out.second_log_prob = out.best_log_prob;
      out.best_log_prob = lp;
      out.best_path = path;
    } else if (lp > out.second_log_prob) {
      out.second_log_prob = lp;
    }
    weights.push_back(lp);
    paths.push_back(path);
    // next path in lexicographic order
    std::size_t pos = K;
    while (pos-- > 0) {
      if (++path[pos] < d) break;
      path[pos] = 0;
      if (pos == 0) {
        for (std::size_t i = 0; i < paths.size(); ++i)
          for (std::size_t n = 0; n < K; ++n)
            out.posteriors[n][static_cast<std::size_t>(paths[i][n])] +=
                std::exp(weights[i] - out.log_likelihood);
        return out;
      }
    }
  }
}

HmmModel random_model(Rng& rng, ObsKind kind) {
  const double p0 = 0.05 + 0.9 * rng.uniform();
  const double q0 = 0.05 + 0.9 * rng.uniform();
  HmmModel m;
  m.obs_kind = kind;
  m.transition = TransitionMatrix::two_state(p0, q0);
  const double g0 = 0.05 + 0.4 * rng.uniform();
  const double g1 = 0.5 + 0.45 * rng.uniform();
  m.emissions = {EmissionModel{Family::Geometric, {g0}},
                 EmissionModel{Family::Geometric, {g1}}};
  const double pi0 = 0.1 + 0.8 * rng.uniform();
  m.initial = {pi0, 1.0 - pi0};
  return m;
}

ObsSeq random_obs(Rng& rng, ObsKind kind, std::size_t K) {
  ObsSeq obs;
  obs.kind = kind;
  for (std::size_t n = 0; n < K; ++n) {
    if (kind == ObsKind::Dt) {
      obs.durations.push_back(1 + static_cast<long>(rng.index(8)));
    } else if (kind == ObsKind::Daily) {
      obs.daily.push_back(static_cast<long>(rng.index(5)));
    } else {
      Window w;
      w.length = 1 + static_cast<int>(rng.index(4));
      w.x = static_cast<int>(rng.index(static_cast<std::size_t>(w.length) + 1));
      w.y = w.x == 0 ? 0 : w.x + static_cast<long>(rng.index(6));
      w.partial = false;
      obs.windows.push_back(w);
    }
  }
  return obs;
}

}  // namespace

TEST_CASE("forward-backward equals the brute-force path sum") {
  Rng rng(101);
  for (int rep = 0; rep < 60; ++rep) {
    const ObsKind kind = rep % 3 == 0 ? ObsKind::X : (rep % 3 == 1 ? ObsKind::Dt : ObsKind::XY);
    const HmmModel m = random_model(rng, kind);
    const ObsSeq obs = random_obs(rng, kind, 2 + rng.index(9));
    const auto oracle = enumerate_paths(m, obs);
    const auto fb = forward_backward(m, obs);
    CHECK(fb.log_likelihood == Catch::Approx(oracle.log_likelihood).margin(1e-12));
    for (std::size_t n = 0; n < obs.size(); ++n)
      for (int j = 0; j < 2; ++j)
        CHECK(fb.posteriors[n][static_cast<std::size_t>(j)] ==
              Catch::Approx(oracle.posteriors[n][static_cast<std::size_t>(j)]).margin(1e-9));
  }
}

TEST_CASE("toy chain with all parameters one half") {
  HmmModel m;
  m.obs_kind = ObsKind::X;
  m.transition = TransitionMatrix::two_state(0.5, 0.5);
  m.emissions = {EmissionModel{Family::Geometric, {0.5}},
                 EmissionModel{Family::Geometric, {0.5}}};
  m.initial = {0.5, 0.5};
  ObsSeq obs;
  obs.kind = ObsKind::X;
  obs.windows = {{1, 1, 1, false}, {0, 0, 1, false}, {1, 1, 1, false}};
  const auto oracle = enumerate_paths(m, obs);
  const auto fb = forward_backward(m, obs);
  CHECK(fb.log_likelihood == Catch::Approx(oracle.log_likelihood).margin(1e-12));
  // every day is a fair coin regardless of state: likelihood (1/2)^3
  CHECK(fb.log_likelihood == Catch::Approx(3.0 * std::log(0.5)).margin(1e-12));
}

TEST_CASE("identical emissions give the stationary mixture as posterior") {
  HmmModel m;
  m.obs_kind = ObsKind::Dt;
  m.transition = TransitionMatrix::two_state(0.2, 0.3);
  m.emissions = {EmissionModel{Family::Geometric, {0.4}},
                 EmissionModel{Family::Geometric, {0.4}}};
  m.initial = m.transition.stationary();
  ObsSeq obs;
  obs.kind = ObsKind::Dt;
  obs.durations = {3, 1, 1, 7, 2, 1};
  const auto fb = forward_backward(m, obs);
  for (const auto& row : fb.posteriors) {
    CHECK(row[0] == Catch::Approx(m.initial[0]).margin(1e-12));
    CHECK(row[1] == Catch::Approx(m.initial[1]).margin(1e-12));
  }
}

TEST_CASE("single observation posterior is Bayes on initial x emission") {
  Rng rng(7);
  const HmmModel m = random_model(rng, ObsKind::Dt);
  ObsSeq obs;
  obs.kind = ObsKind::Dt;
  obs.durations = {4};
  const auto fb = forward_backward(m, obs);
  const double w0 = m.initial[0] * std::exp(oracle_log_obs(m, 0, obs, 0));
  const double w1 = m.initial[1] * std::exp(oracle_log_obs(m, 1, obs, 0));
  CHECK(fb.posteriors[0][0] == Catch::Approx(w0 / (w0 + w1)).margin(1e-12));
}

TEST_CASE("posterior rows sum to one") {
  Rng rng(19);
  const HmmModel m = random_model(rng, ObsKind::XY);
  const ObsSeq obs = random_obs(rng, ObsKind::XY, 40);
  const auto fb = forward_backward(m, obs);
  for (const auto& row : fb.posteriors)
    CHECK(row[0] + row[1] == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("zero-likelihood observations are rejected") {
  HmmModel m;
  m.obs_kind = ObsKind::X;
  m.transition = TransitionMatrix::two_state(0.1, 0.1);
  m.emissions = {EmissionModel{Family::Geometric, {0.0}},
                 EmissionModel{Family::Geometric, {0.0}}};
  m.initial = {0.5, 0.5};
  ObsSeq obs;
  obs.kind = ObsKind::X;
  obs.windows = {{2, 2, 5, false}};  // impossible when gamma = 0 in both states
  CHECK_THROWS_AS(forward_backward(m, obs), DataError);
}

TEST_CASE("viterbi matches exhaustive argmax") {
  Rng rng(23);
  int compared_paths = 0;
  for (int rep = 0; rep < 60; ++rep) {
    const ObsKind kind = rep % 2 ? ObsKind::X : ObsKind::Dt;
    const HmmModel m = random_model(rng, kind);
    const ObsSeq obs = random_obs(rng, kind, 2 + rng.index(11));
    const auto oracle = enumerate_paths(m, obs);
    const auto path = viterbi(m, obs);
    CHECK(path.path_log_prob == Catch::Approx(oracle.best_log_prob).margin(1e-12));
    if (oracle.best_log_prob - oracle.second_log_prob > 1e-9) {
      CHECK(path.states == oracle.best_path);
      ++compared_paths;
    }
    CHECK(path.marginal_log_likelihood >= path.path_log_prob - 1e-12);
  }
  CHECK(compared_paths > 30);
}

TEST_CASE("viterbi tie-break prefers the lower state index") {
  HmmModel m;
  m.obs_kind = ObsKind::Dt;
  m.transition = TransitionMatrix::two_state(0.25, 0.25);
  m.emissions = {EmissionModel{Family::Geometric, {0.3}},
                 EmissionModel{Family::Geometric, {0.3}}};
  m.initial = {0.5, 0.5};
  ObsSeq obs;
  obs.kind = ObsKind::Dt;
  obs.durations = {2, 5, 1, 3};
  const auto path = viterbi(m, obs);
  CHECK(path.states == std::vector<int>{0, 0, 0, 0});
}

TEST_CASE("viterbi labels an obvious burst Active") {
  HmmModel m;
  m.obs_kind = ObsKind::X;
  m.transition = TransitionMatrix::two_state(0.1, 0.1);
  m.emissions = {EmissionModel{Family::Geometric, {0.01}},
                 EmissionModel{Family::Geometric, {0.9}}};
  m.initial = {0.5, 0.5};
  ObsSeq obs;
  obs.kind = ObsKind::X;
  for (int x : {0, 0, 5, 5, 0, 0}) obs.windows.push_back({x, x, 5, false});
  const auto path = viterbi(m, obs);
  CHECK(path.states == std::vector<int>{0, 0, 1, 1, 0, 0});
  const auto oracle = enumerate_paths(m, obs);
  CHECK(path.states == oracle.best_path);
}

TEST_CASE("baum-welch log-likelihood is non-decreasing") {
  Rng rng(31);
  for (int rep = 0; rep < 30; ++rep) {
    const ObsKind kind = rep % 2 ? ObsKind::XY : ObsKind::Dt;
    HmmModel truth = random_model(rng, kind);
    const ObsSeq obs = random_obs(rng, kind, 60);
    HmmModel init = random_model(rng, kind);
    init.obs_kind = kind;
    const auto res = baum_welch(init, obs, 1e-10, 40);
    for (std::size_t i = 1; i < res.ll_trace.size(); ++i) {
      INFO("rep=" << rep << " iter=" << i);
      CHECK(res.ll_trace[i] >= res.ll_trace[i - 1] - 1e-8);
    }
  }
}

TEST_CASE("baum-welch leaves its own fixed point unchanged") {
  ObsSeq obs;
  obs.kind = ObsKind::Daily;
  obs.daily = {0, 1, 0, 0, 2, 1, 0, 0, 0, 1};
  const auto pooled = fit_ml(Family::Geometric, obs.daily);
  HmmModel m;
  m.obs_kind = ObsKind::Daily;
  m.transition = TransitionMatrix::two_state(0.1, 0.1);
  m.emissions = {pooled.model, pooled.model};
  m.initial = {0.5, 0.5};
  const auto res = baum_welch(m, obs, 1e-12, 6);
  CHECK(res.model.transition.at(0, 1) == Catch::Approx(0.1).margin(1e-9));
  CHECK(res.model.transition.at(1, 0) == Catch::Approx(0.1).margin(1e-9));
  CHECK(res.model.emissions[0].params[0] == Catch::Approx(pooled.model.params[0]).margin(1e-9));
  CHECK(res.model.emissions[1].params[0] == Catch::Approx(pooled.model.params[0]).margin(1e-9));
  CHECK(res.model.initial[0] == Catch::Approx(0.5).margin(1e-9));
}

TEST_CASE("baum-welch recovers synthetic two-state parameters") {
  HmmModel truth;
  truth.obs_kind = ObsKind::X;
  truth.transition = TransitionMatrix::two_state(0.1, 0.1);
  truth.emissions = {EmissionModel{Family::Geometric, {0.09}},
                     EmissionModel{Family::Geometric, {0.36}}};
  truth.initial = truth.transition.stationary();
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const auto sim = simulate_hmm_daily(truth, 15, 30000, seed);
    const auto res = classify(sim.series, 15, Family::Geometric, ObsKind::X, {});
    INFO("seed=" << seed);
    CHECK(std::abs(res.model.emissions[0].params[0] - 0.09) < 0.02);
    CHECK(std::abs(res.model.emissions[1].params[0] - 0.36) < 0.02);
    CHECK(std::abs(res.model.transition.at(0, 1) - 0.1) < 0.05);
    CHECK(std::abs(res.model.transition.at(1, 0) - 0.1) < 0.05);
    // decoded states against the simulated ground truth
    std::size_t agree = 0;
    for (std::size_t n = 0; n < res.path.states.size(); ++n)
      agree += res.path.states[n] == sim.window_states[n];
    CHECK(static_cast<double>(agree) / static_cast<double>(res.path.states.size()) >= 0.9);
  }
}

TEST_CASE("classification is invariant to relabeling the initialization") {
  Rng rng(41);
  HmmModel truth = random_model(rng, ObsKind::Dt);
  const ObsSeq obs = random_obs(rng, ObsKind::Dt, 120);

  HmmModel init;
  init.obs_kind = ObsKind::Dt;
  init.transition = TransitionMatrix::two_state(0.15, 0.25);
  init.emissions = {EmissionModel{Family::Geometric, {0.2}},
                    EmissionModel{Family::Geometric, {0.6}}};
  init.initial = {0.7, 0.3};
  HmmModel flipped;
  flipped.obs_kind = ObsKind::Dt;
  flipped.transition = TransitionMatrix::two_state(0.25, 0.15);
  flipped.emissions = {init.emissions[1], init.emissions[0]};
  flipped.initial = {0.3, 0.7};

  const auto a = baum_welch(init, obs, 1e-10, 200);
  const auto b = baum_welch(flipped, obs, 1e-10, 200);
  REQUIRE(a.model.state_rate(0) <= a.model.state_rate(1));
  REQUIRE(b.model.state_rate(0) <= b.model.state_rate(1));
  for (int j = 0; j < 2; ++j)
    CHECK(a.model.emissions[static_cast<std::size_t>(j)].params[0] ==
          Catch::Approx(b.model.emissions[static_cast<std::size_t>(j)].params[0]).margin(1e-9));
  CHECK(a.model.transition.at(0, 1) == Catch::Approx(b.model.transition.at(0, 1)).margin(1e-9));
}

TEST_CASE("classify handles an all-zero series") {
  const auto res = classify(EventSeries{0, std::vector<long>(60, 0)}, 15,
                            Family::Geometric, ObsKind::XY, {});
  CHECK(res.summary.degenerate);
  CHECK(res.summary.n_spurt == 0);
  CHECK(res.summary.fractional_activity == 0.0);
}

TEST_CASE("fractional activity arithmetic matches the published table") {
  // f = N_spurt * delta / N for (46, 15, 3286) and (20, 30, 3286)
  CHECK(std::abs(46.0 * 15.0 / 3286.0 - 0.2099) < 1e-4);
  CHECK(std::abs(20.0 * 30.0 / 3286.0 - 0.1825) < 1e-4);
}

TEST_CASE("rate estimate is the reciprocal mean inter-arrival") {
  InterArrivalSeries ia;
  ia.durations = {2, 2, 2};
  CHECK(rate_estimate(ia) == Catch::Approx(0.5));
  ia.durations = {1};
  CHECK(rate_estimate(ia) == Catch::Approx(1.0));

  Rng rng(55);
  double acc = 0.0;
  const int n = 10000;
  InterArrivalSeries mc;
  for (int i = 0; i < n; ++i) mc.durations.push_back(rng.geometric_wait(0.0857));
  acc = rate_estimate(mc);
  CHECK(std::abs(acc - 0.0857) < 0.003);
}

TEST_CASE("baum-welch flags state collapse on one-state data") {
  // emissions so separated that one state never fires
  ObsSeq obs;
  obs.kind = ObsKind::Dt;
  for (int i = 0; i < 50; ++i) obs.durations.push_back(1);
  HmmModel init;
  init.obs_kind = ObsKind::Dt;
  init.transition = TransitionMatrix::two_state(1e-9, 0.999999);
  init.emissions = {EmissionModel{Family::Geometric, {0.999}},
                    EmissionModel{Family::Geometric, {1e-6}}};
  init.initial = {1.0 - 1e-12, 1e-12};
  const auto res = baum_welch(init, obs, 1e-10, 10);
  CHECK(res.state_collapsed);
}
