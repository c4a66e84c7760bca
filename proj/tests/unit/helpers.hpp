#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "postfeas/lp.hpp"
#include "postfeas/rng.hpp"

namespace testing {

inline double uniform(postfeas::Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

inline std::size_t pick(postfeas::Rng& rng, std::size_t n) {
  return std::min<std::size_t>(n - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)));
}

/// Small random LP with mixed senses and finite box bounds.
inline postfeas::LpProblem random_box_lp(postfeas::Rng& rng, std::size_t n, std::size_t m) {
  using namespace postfeas;
  LpProblem lp = make_problem(n);
  for (std::size_t j = 0; j < n; ++j) {
    lp.objective[j] = uniform(rng, -3, 3);
    const double lo = uniform(rng, -2, 1);
    lp.bounds[j] = {lo, lo + uniform(rng, 0.5, 4)};
  }
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> row(n);
    for (auto& v : row) v = uniform(rng, -2, 2);
    const double u = rng.uniform();
    const Sense s = u < 0.6 ? Sense::LessEqual : (u < 0.9 ? Sense::GreaterEqual : Sense::Equal);
    lp.add(std::move(row), s, uniform(rng, -2, 3));
  }
  return lp;
}

/// Kolmogorov-Smirnov statistic of `xs` against `cdf`.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
inline double ks_critical_1pct(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double eps,
                               int depth = 50) {
  std::function<double(double, double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole, double tol, int d) {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid);
        const double rm = 0.5 * (mid + hi);
        const double flm = f(lm);
        const double frm = f(rm);
        const double left = (mid - lo) / 6 * (flo + 4 * flm + fmid);
        const double right = (hi - mid) / 6 * (fmid + 4 * frm + fhi);
        if (d <= 0 || std::abs(left + right - whole) <= 15 * tol) return left + right + (left + right - whole) / 15;
        return rec(lo, mid, flo, flm, fmid, left, tol / 2, d - 1) + rec(mid, hi, fmid, frm, fhi, right, tol / 2, d - 1);
      };
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return rec(a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), eps, depth);
}

}  // namespace testing
