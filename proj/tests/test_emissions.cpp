#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <vector>

#include "ahmm/emissions.hpp"
#include "ahmm/rng.hpp"

using namespace ahmm;

namespace {

// Oracle: distribution of (X, Y) over a delta-day window by dynamic
// programming over days, independent of the closed forms under test.
std::map<std::pair<long, long>, double> window_joint_by_dp(const EmissionModel& day,
                                                           int delta, long y_max) {
  std::map<std::pair<long, long>, double> dist{{{0, 0}, 1.0}};
  for (int d = 0; d < delta; ++d) {
    std::map<std::pair<long, long>, double> next;
    for (const auto& [xy, p] : dist) {
      for (long m = 0; xy.second + m <= y_max; ++m) {
        const double pm = day.pmf(m);
        if (pm == 0.0 && m > 0) continue;
        next[{xy.first + (m > 0 ? 1 : 0), xy.second + m}] += p * pm;
      }
    }
    dist.swap(next);
  }
  return dist;
}

// Oracle: delta-fold convolution of the day pmf (law of Y).
std::vector<double> window_y_by_convolution(const EmissionModel& day, int delta,
                                            long y_max) {
  std::vector<double> acc{1.0};
  for (int d = 0; d < delta; ++d) {
    std::vector<double> next(static_cast<std::size_t>(y_max) + 1, 0.0);
    for (std::size_t a = 0; a < acc.size(); ++a)
      for (long m = 0; m + static_cast<long>(a) <= y_max; ++m)
        next[a + static_cast<std::size_t>(m)] += acc[a] * day.pmf(m);
    acc.swap(next);
  }
  return acc;
}

double direct_poisson_pmf(double mean, long k) {
  return std::exp(-mean + static_cast<double>(k) * std::log(mean) -
                  std::lgamma(static_cast<double>(k) + 1.0));
}

}  // namespace

TEST_CASE("per-day pmf closed forms") {
  const EmissionModel geom{Family::Geometric, {0.5}};
  CHECK(geom.pmf(0) == Catch::Approx(0.5));
  CHECK(geom.pmf(2) == Catch::Approx(0.125));

  const EmissionModel hg{Family::HurdleGeometric, {0.4, 0.5}};
  CHECK(hg.pmf(0) == Catch::Approx(0.6));
  CHECK(hg.pmf(1) == Catch::Approx(0.2));
  CHECK(hg.pmf(2) == Catch::Approx(0.1));

  const EmissionModel hz{Family::HurdleZeta, {1.0, 2.0}};
  const double pi = 3.14159265358979323846;
  CHECK(hz.pmf(1) == Catch::Approx(6.0 / (pi * pi)).epsilon(1e-10));
}

TEST_CASE("pmf mass reaches 1 under adaptive truncation") {
  const std::vector<EmissionModel> models{
      {Family::Poisson, {0.7}},
      {Family::ShiftedZeta, {2.4}},
      {Family::Geometric, {0.36}},
      {Family::Polya, {1.48, 0.27}},
      {Family::HurdleZeta, {0.39, 2.6}},
      {Family::HurdleGeometric, {0.39, 0.31}},
  };
  for (const auto& m : models) {
    m.validate();
    double mass = 0.0, prev = 1.0;
    long k = 0;
    // adaptive cutoff: stop once the running tail estimate is negligible
    while (k < 2000000 && (1.0 - mass) > 1e-10 * 0.5 && (prev > 0.0 || k < 4)) {
      prev = m.pmf(k);
      mass += prev;
      ++k;
      if (m.family == Family::ShiftedZeta || m.family == Family::HurdleZeta) {
        // heavy tail: bound remainder by the zeta integral tail
        const double s = m.params.back();
        const double tail = std::pow(static_cast<double>(k), 1.0 - s) / (s - 1.0) /
                            riemann_zeta(s);
        if (tail < 1e-10) break;
      }
    }
    INFO(family_name(m.family));
    CHECK(mass >= 1.0 - 1e-9);
    CHECK(mass <= 1.0 + 1e-9);
  }
}

TEST_CASE("invalid parameter domains are rejected") {
  CHECK_THROWS_AS((EmissionModel{Family::Geometric, {1.0}}).validate(), std::domain_error);
  CHECK_THROWS_AS((EmissionModel{Family::ShiftedZeta, {1.0}}).validate(), std::domain_error);
  CHECK_THROWS_AS((EmissionModel{Family::Polya, {-1.0, 0.5}}).validate(), std::domain_error);
  CHECK_THROWS_AS((EmissionModel{Family::HurdleGeometric, {0.5}}).validate(), std::domain_error);
}

TEST_CASE("closed-form ML fits") {
  CHECK(fit_ml(Family::Poisson, std::vector<long>{0, 0, 2, 2}).model.params[0] ==
        Catch::Approx(1.0));
  const auto hg = fit_ml(Family::HurdleGeometric, std::vector<long>{0, 0, 1, 3});
  CHECK(hg.model.params[0] == Catch::Approx(0.5));
  CHECK(hg.model.params[1] == Catch::Approx(0.5));
  CHECK(hg.aic == Catch::Approx(2.0 * 2 - 2.0 * hg.log_likelihood));
}

TEST_CASE("hurdle-geometric fit beats a parameter grid") {
  const std::vector<long> data{0, 0, 1, 3};
  const auto fit = fit_ml(Family::HurdleGeometric, data);
  double best_grid = -1e300;
  for (int a = 1; a < 100; ++a) {
    for (int b = 0; b < 100; ++b) {
      EmissionModel m{Family::HurdleGeometric,
                      {a / 100.0, b / 100.0}};
      double ll = 0.0;
      for (long k : data) ll += m.log_pmf(k);
      best_grid = std::max(best_grid, ll);
    }
  }
  CHECK(fit.log_likelihood >= best_grid - 1e-12);
}

TEST_CASE("ML fit dominates a parameter grid for every family") {
  Rng rng(11);
  std::vector<long> data;
  for (int i = 0; i < 400; ++i)
    data.push_back(rng.bernoulli(0.45) ? 1 + rng.geometric_count(0.45) : 0);

  std::map<long, long> hist;
  for (long k : data) ++hist[k];

  for (Family f : {Family::Poisson, Family::ShiftedZeta, Family::Geometric,
                   Family::Polya, Family::HurdleZeta, Family::HurdleGeometric}) {
    const auto fit = fit_ml(f, data);
    auto ll_at = [&](std::vector<double> params) {
      EmissionModel m{f, std::move(params)};
      double ll = 0.0;
      for (const auto& [k, n] : hist) ll += static_cast<double>(n) * m.log_pmf(k);
      return ll;
    };
    double best_grid = -1e300;
    const int steps = fit.model.n_params() == 1 ? 400 : 100;
    for (int a = 1; a <= steps; ++a) {
      const double u = static_cast<double>(a) / (steps + 1);
      if (fit.model.n_params() == 1) {
        switch (f) {
          case Family::Poisson: best_grid = std::max(best_grid, ll_at({u * 4.0})); break;
          case Family::ShiftedZeta:
            best_grid = std::max(best_grid, ll_at({1.0 + u * 20.0}));
            break;
          default: best_grid = std::max(best_grid, ll_at({u})); break;
        }
      } else {
        for (int b = 1; b <= steps; ++b) {
          const double v = static_cast<double>(b) / (steps + 1);
          switch (f) {
            case Family::Polya:
              best_grid = std::max(best_grid, ll_at({u * 50.0, v}));
              break;
            case Family::HurdleZeta:
              best_grid = std::max(best_grid, ll_at({u, 1.0 + v * 20.0}));
              break;
            default:
              best_grid = std::max(best_grid, ll_at({u, v}));
              break;
          }
        }
      }
    }
    INFO(family_name(f));
    CHECK(fit.log_likelihood >= best_grid - 1e-9);
  }
}

TEST_CASE("geometric fit is consistent on simulated data") {
  Rng rng(42);
  std::vector<long> data;
  data.reserve(100000);
  for (int i = 0; i < 100000; ++i) data.push_back(rng.geometric_count(0.36));
  const auto fit = fit_ml(Family::Geometric, data);
  CHECK(std::abs(fit.model.params[0] - 0.36) < 0.01);
}

TEST_CASE("degenerate all-zero data returns a flagged boundary fit") {
  const std::vector<long> zeros(50, 0);
  for (Family f : {Family::Poisson, Family::Geometric, Family::Polya,
                   Family::HurdleZeta, Family::HurdleGeometric}) {
    const auto fit = fit_ml(f, zeros);
    INFO(family_name(f));
    CHECK(fit.boundary);
    CHECK(std::isfinite(fit.log_likelihood));
  }
}

TEST_CASE("binomial window density for X") {
  CHECK(window_pmf_x(0.0, 5, 0) == Catch::Approx(1.0));
  CHECK(window_pmf_x(0.5, 2, 1) == Catch::Approx(0.5));
  double mass = 0.0;
  for (long k = 0; k <= 15; ++k) mass += window_pmf_x(0.0924, 15, k);
  CHECK(mass == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("poisson approximation bound") {
  CHECK(poisson_bound(0.0, 15, 3) == 0.0);

  const double dg = 15 * 0.0924;
  const double expected = std::min(1.0 - std::exp(-dg), dg / 3.0) * 0.0924;
  CHECK(poisson_bound(0.0924, 15, 3) == Catch::Approx(expected));
  CHECK(expected == Catch::Approx(0.0427).margin(5e-4));
  const double diff = std::abs(window_pmf_x(0.0924, 15, 3) - direct_poisson_pmf(dg, 3));
  CHECK(diff <= poisson_bound(0.0924, 15, 3));

  for (double gamma : {0.01, 0.1, 0.4}) {
    for (int delta : {5, 15, 30}) {
      for (long k = 0; k <= delta; ++k) {
        const double d = std::abs(window_pmf_x(gamma, delta, k) -
                                  direct_poisson_pmf(delta * gamma, k));
        INFO("gamma=" << gamma << " delta=" << delta << " k=" << k);
        CHECK(d <= poisson_bound(gamma, delta, k) + 1e-15);
      }
    }
  }
}

TEST_CASE("compound geometric window density for Y") {
  CHECK(window_pmf_y_geometric(0.3, 4, 0) == Catch::Approx(std::pow(0.7, 4)));
  CHECK(window_pmf_y_geometric(0.5, 1, 2) == Catch::Approx(0.125));

  const EmissionModel day{Family::Geometric, {0.3}};
  const auto oracle = window_y_by_convolution(day, 4, 80);
  for (long r = 0; r <= 60; ++r) {
    INFO("r=" << r);
    CHECK(std::abs(window_pmf_y_geometric(0.3, 4, r) -
                   oracle[static_cast<std::size_t>(r)]) < 1e-10);
  }
}

TEST_CASE("joint window density matches day-level enumeration") {
  const std::vector<EmissionModel> days{
      {Family::Geometric, {0.35}},
      {Family::HurdleGeometric, {0.3, 0.45}},
  };
  for (const auto& day : days) {
    for (int delta : {1, 2, 3, 5}) {
      const auto oracle = window_joint_by_dp(day, delta, 40);
      for (long k = 0; k <= delta; ++k) {
        for (long r = k; r <= 40; ++r) {
          const auto it = oracle.find({k, r});
          const double want = it == oracle.end() ? 0.0 : it->second;
          INFO(family_name(day.family) << " delta=" << delta << " k=" << k << " r=" << r);
          CHECK(std::abs(window_pmf_joint(day, delta, k, r) - want) < 1e-10);
        }
      }
    }
  }
}

TEST_CASE("joint density edge cases") {
  const EmissionModel geom{Family::Geometric, {0.3}};
  const EmissionModel hg{Family::HurdleGeometric, {0.3, 0.45}};
  CHECK(window_pmf_joint(geom, 4, 0, 0) == Catch::Approx(std::pow(0.7, 4)));
  CHECK(window_pmf_joint(hg, 4, 0, 0) == Catch::Approx(std::pow(0.7, 4)));
  CHECK(window_pmf_joint(geom, 4, 0, 3) == 0.0);
  CHECK(window_pmf_joint(hg, 4, 0, 3) == 0.0);
  CHECK_THROWS_AS(window_pmf_joint(EmissionModel{Family::Poisson, {1.0}}, 4, 0, 0),
                  std::invalid_argument);
}

TEST_CASE("joint marginal over Y recovers the binomial X density") {
  const EmissionModel hg{Family::HurdleGeometric, {0.2, 0.4}};
  for (long k = 0; k <= 3; ++k) {
    double marg = 0.0;
    for (long r = k; r <= 300; ++r) marg += window_pmf_joint(hg, 3, k, r);
    CHECK(std::abs(marg - window_pmf_x(0.2, 3, k)) < 1e-10);
  }
  const EmissionModel geom{Family::Geometric, {0.25}};
  for (long k = 0; k <= 4; ++k) {
    double marg = 0.0;
    for (long r = k; r <= 400; ++r) marg += window_pmf_joint(geom, 4, k, r);
    CHECK(std::abs(marg - window_pmf_x(0.25, 4, k)) < 1e-10);
  }
}

TEST_CASE("log-pmf of the geometric families is concave on its support") {
  // geometric: all successive log-ratios equal log(gamma)
  const EmissionModel geom{Family::Geometric, {0.37}};
  double prev = geom.log_pmf(1) - geom.log_pmf(0);
  for (long k = 1; k < 30; ++k) {
    const double d = geom.log_pmf(k + 1) - geom.log_pmf(k);
    CHECK(d <= prev + 1e-12);
    prev = d;
  }
  // hurdle-geometric: log-concave whenever gamma >= mu
  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const double mu = 0.05 + 0.85 * rng.uniform();
    const double gamma = mu + (1.0 - mu) * rng.uniform() * 0.999;
    const EmissionModel hg{Family::HurdleGeometric, {gamma, mu}};
    double d_prev = hg.log_pmf(1) - hg.log_pmf(0);
    for (long k = 1; k < 20; ++k) {
      const double d = hg.log_pmf(k + 1) - hg.log_pmf(k);
      INFO("gamma=" << gamma << " mu=" << mu << " k=" << k);
      CHECK(d <= d_prev + 1e-12);
      d_prev = d;
    }
  }
}

TEST_CASE("aic definition and table layout") {
  const std::vector<long> data{0, 1, 0, 2, 0, 0, 1};
  const auto table = aic_table({data}, {Family::Geometric});
  REQUIRE(table.size() == 1);
  REQUIRE(table[0].size() == 1);
  const auto& row = table[0][0];
  CHECK(row.fit.aic == Catch::Approx(2.0 * row.fit.n_params - 2.0 * row.fit.log_likelihood));
  double total = row.expected_gt4;
  for (double e : row.expected) total += e;
  CHECK(total == Catch::Approx(static_cast<double>(data.size())));
}

TEST_CASE("aic prefers the generating family") {
  Rng rng(5);
  std::vector<long> data;
  data.reserve(10000);
  for (int i = 0; i < 10000; ++i) data.push_back(rng.geometric_count(0.36));
  const auto table = aic_table({data}, {Family::Geometric, Family::Poisson});
  CHECK(table[0][0].fit.aic < table[0][1].fit.aic);
}
