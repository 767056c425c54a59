#pragma once

// Slow, independent reference implementations used to pin the fast metrics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace oracle {

// CDF step difference integrated on the grid of every sample point, counting
// with a plain scan per grid cell.
inline double w1_grid_cdf(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> grid(a);
  grid.insert(grid.end(), b.begin(), b.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    double fa = 0, fb = 0;
    for (double x : a) fa += x <= grid[k];
    for (double x : b) fb += x <= grid[k];
    total += std::abs(fa / a.size() - fb / b.size()) * (grid[k + 1] - grid[k]);
  }
  return total;
}

// Quantile-function route: integral over u of |Qa(u) - Qb(u)|.
inline double w1_quantile(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<double> cuts{0.0, 1.0};
  for (std::size_t i = 1; i < a.size(); ++i) cuts.push_back(double(i) / a.size());
  for (std::size_t j = 1; j < b.size(); ++j) cuts.push_back(double(j) / b.size());
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double lo = cuts[k], hi = cuts[k + 1];
    if (hi <= lo) continue;
    const double mid = 0.5 * (lo + hi);
    const auto ia = std::min(a.size() - 1, static_cast<std::size_t>(mid * a.size()));
    const auto ib = std::min(b.size() - 1, static_cast<std::size_t>(mid * b.size()));
    total += std::abs(a[ia] - b[ib]) * (hi - lo);
  }
  return total;
}

// O(n^2) pair counting for tau-b.
inline double kendall_pairs(const std::vector<double>& x, const std::vector<double>& y) {
  std::int64_t c = 0, d = 0, tx = 0, ty = 0;
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx == 0) ++tx;
      if (dy == 0) ++ty;
      if (dx == 0 || dy == 0) continue;
      (dx > 0) == (dy > 0) ? ++c : ++d;
    }
  }
  const std::int64_t n0 = n * (n - 1) / 2;
  return static_cast<double>(c - d) / std::sqrt(static_cast<double>(n0 - tx) * static_cast<double>(n0 - ty));
}

inline double naive_mean(const std::vector<double>& v) {
  long double s = 0;
  for (double x : v) s += x;
  return static_cast<double>(s / v.size());
}

inline double naive_mae(const std::map<std::string, std::vector<double>>& p,
                        const std::map<std::string, std::vector<double>>& t) {
  long double s = 0;
  for (const auto& [g, v] : p) s += std::fabs(naive_mean(v) - naive_mean(t.at(g)));
  return static_cast<double>(s / p.size());
}

// Textbook two-pass formula in long double.
inline double naive_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const long double mx = naive_mean(x), my = naive_mean(y);
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

// Pair-counting adjusted Rand index.
inline double ari_pairs(const std::vector<int>& a, const std::vector<int>& b) {
  const std::size_t n = a.size();
  double same_both = 0, same_a = 0, same_b = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool sa = a[i] == a[j], sb = b[i] == b[j];
      same_a += sa;
      same_b += sb;
      same_both += sa && sb;
    }
  }
  const double pairs = n * (n - 1) / 2.0;
  const double expected = same_a * same_b / pairs;
  const double max_index = 0.5 * (same_a + same_b);
  if (max_index == expected) return 1.0;
  return (same_both - expected) / (max_index - expected);
}

}  // namespace oracle
