#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

namespace ahmm {

// Golden-section maximization of a unimodal f on [lo, hi].
// Returns the abscissa of the maximum.
template <typename F>
double golden_section_max(F&& f, double lo, double hi, double tol = 1e-10,
                          int max_iter = 300) {
  static const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > tol * (1.0 + std::abs(a) + std::abs(b));
       ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  const double x = (fc > fd) ? c : d;
  // Endpoints can beat the interior when the maximum sits on the boundary.
  double best_x = x, best_f = f(x);
  for (double e : {lo, hi}) {
    const double fe = f(e);
    if (fe > best_f) {
      best_f = fe;
      best_x = e;
    }
  }
  return best_x;
}

struct NelderMeadResult {
  std::vector<double> x;
  double fx = 0.0;
  int evals = 0;
  bool converged = false;
};

// Nelder-Mead simplex maximization in R^n (unconstrained; callers map
// bounded parameters through transforms). Standard reflection/expansion/
// contraction/shrink coefficients.
template <typename F>
NelderMeadResult nelder_mead_max(F&& f, const std::vector<double>& x0,
                                 double step = 0.5, double tol = 1e-9,
                                 int max_iter = 2000) {
  const std::size_t n = x0.size();
  NelderMeadResult res;
  auto eval = [&](const std::vector<double>& x) {
    ++res.evals;
    const double v = f(x);
    return std::isfinite(v) ? v : -1e300;
  };

  std::vector<std::vector<double>> simplex(n + 1, x0);
  std::vector<double> fvals(n + 1);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += step;
  for (std::size_t i = 0; i <= n; ++i) fvals[i] = eval(simplex[i]);

  auto order = [&]() {
    std::vector<std::size_t> idx(n + 1);
    for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return fvals[a] > fvals[b]; });
    std::vector<std::vector<double>> s2(n + 1);
    std::vector<double> f2(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      s2[i] = simplex[idx[i]];
      f2[i] = fvals[idx[i]];
    }
    simplex.swap(s2);
    fvals.swap(f2);
  };

  for (int it = 0; it < max_iter; ++it) {
    order();
    if (std::abs(fvals[0] - fvals[n]) <= tol * (1.0 + std::abs(fvals[0]))) {
      res.converged = true;
      break;
    }
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / static_cast<double>(n);

    auto blend = [&](double coef) {
      std::vector<double> x(n);
      for (std::size_t j = 0; j < n; ++j)
        x[j] = centroid[j] + coef * (centroid[j] - simplex[n][j]);
      return x;
    };

    const auto xr = blend(1.0);
    const double fr = eval(xr);
    if (fr > fvals[0]) {
      const auto xe = blend(2.0);
      const double fe = eval(xe);
      if (fe > fr) {
        simplex[n] = xe;
        fvals[n] = fe;
      } else {
        simplex[n] = xr;
        fvals[n] = fr;
      }
    } else if (fr > fvals[n - 1]) {
      simplex[n] = xr;
      fvals[n] = fr;
    } else {
      const auto xc = blend(fr > fvals[n] ? 0.5 : -0.5);
      const double fc = eval(xc);
      if (fc > std::max(fr, fvals[n])) {
        simplex[n] = xc;
        fvals[n] = fc;
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t j = 0; j < n; ++j)
            simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
          fvals[i] = eval(simplex[i]);
        }
      }
    }
  }
  order();
  res.x = simplex[0];
  res.fx = fvals[0];
  return res;
}

}  // namespace ahmm
