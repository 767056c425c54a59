#include "vplay/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <utility>

#include "vplay/error.hpp"
#include "vplay/text.hpp"

namespace vplay::metrics {

double mean(const std::vector<double>& v) {
  if (v.empty()) throw UndefinedMetricError("mean of an empty sample");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

namespace {

void check_same_games(const GameSamples& a, const GameSamples& b) {
  if (a.empty()) throw UndefinedMetricError("no games to compare");
  if (a.size() != b.size()) throw std::invalid_argument("predicted and truth cover different games");
  for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
    if (ia->first != ib->first) throw std::invalid_argument("game sets differ at " + ia->first);
    if (ia->second.empty() || ib->second.empty()) {
      throw UndefinedMetricError("game " + ia->first + " has an empty sample");
    }
  }
}

}  // namespace

double mae(const GameSamples& predicted, const GameSamples& truth) {
  check_same_games(predicted, truth);
  double total = 0.0;
  for (const auto& [game, p] : predicted) total += std::abs(mean(p) - mean(truth.at(game)));
  return total / static_cast<double>(predicted.size());
}

double wasserstein1(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw UndefinedMetricError("wasserstein1 of an empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  // Integrate |F_a - F_b| between consecutive points of the merged support.
  std::size_t i = 0, j = 0;
  double x = std::min(a[0], b[0]);
  double total = 0.0;
  while (i < a.size() || j < b.size()) {
    double next;
    if (j >= b.size() || (i < a.size() && a[i] <= b[j])) next = a[i];
    else next = b[j];
    total += std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb) * (next - x);
    x = next;
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
  }
  return total;
}

double wasserstein_macro(const GameSamples& predicted, const GameSamples& truth) {
  check_same_games(predicted, truth);
  double total = 0.0;
  for (const auto& [game, p] : predicted) total += wasserstein1(p, truth.at(game));
  return total / static_cast<double>(predicted.size());
}

namespace {

// Number of pairs sharing a value in runs of equal elements of a sorted range.
template <class It, class Eq>
std::int64_t tied_pairs(It first, It last, Eq eq) {
  std::int64_t total = 0;
  while (first != last) {
    auto run = first;
    std::int64_t len = 0;
    while (run != last && eq(*run, *first)) {
      ++run;
      ++len;
    }
    total += len * (len - 1) / 2;
    first = run;
  }
  return total;
}

// Stable merge sort on the second coordinate, returning the number of swaps.
std::int64_t merge_count(std::vector<std::pair<double, double>>& v, std::size_t lo, std::size_t hi,
                         std::vector<std::pair<double, double>>& buf) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = merge_count(v, lo, mid, buf) + merge_count(v, mid, hi, buf);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j].second < v[i].second) {
      swaps += static_cast<std::int64_t>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

}  // namespace

double kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("kendall_tau_b: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) throw UndefinedMetricError("kendall_tau_b needs at least two points");
  std::vector<std::pair<double, double>> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = {x[i], y[i]};
  std::sort(v.begin(), v.end());
  const std::int64_t n0 = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  const std::int64_t n1 = tied_pairs(v.begin(), v.end(), [](auto& a, auto& b) { return a.first == b.first; });
  const std::int64_t n3 = tied_pairs(v.begin(), v.end(), [](auto& a, auto& b) { return a == b; });
  std::vector<std::pair<double, double>> buf(n);
  const std::int64_t swaps = merge_count(v, 0, n, buf);
  const std::int64_t n2 = tied_pairs(v.begin(), v.end(), [](auto& a, auto& b) { return a.second == b.second; });
  if (n0 == n1 || n0 == n2) throw UndefinedMetricError("kendall_tau_b undefined for a constant input");
  const double num = static_cast<double>(n0 - n1 - n2 + n3 - 2 * swaps);
  return num / std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
}

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
  if (x.size() < 2) return std::nullopt;
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

double distinct2(const std::vector<std::string>& texts) {
  std::set<std::pair<std::string, std::string>> unique;
  std::size_t total = 0;
  for (const auto& t : texts) {
    const auto tokens = text::normalized_tokens(t);
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      unique.emplace(tokens[i - 1], tokens[i]);
      ++total;
    }
  }
  if (total == 0) throw UndefinedMetricError("distinct2: corpus has no bigrams");
  return static_cast<double>(unique.size()) / static_cast<double>(total);
}

double distinct2_macro(const std::map<std::string, std::vector<std::string>>& texts) {
  double sum = 0.0;
  std::size_t games = 0;
  for (const auto& [game, corpus] : texts) {
    try {
      sum += distinct2(corpus);
      ++games;
    } catch (const UndefinedMetricError&) {
    }
  }
  if (games == 0) throw UndefinedMetricError("distinct2: no game has a bigram");
  return sum / static_cast<double>(games);
}

double fact_accuracy(std::size_t supported, std::size_t inferred, std::size_t contradicted) {
  const std::size_t total = supported + inferred + contradicted;
  if (total == 0) throw UndefinedMetricError("fact accuracy with zero claims");
  return static_cast<double>(supported + inferred) / static_cast<double>(total);
}

double op_rec(std::size_t matched, std::size_t total) {
  if (total == 0) throw UndefinedMetricError("opinion recovery with an empty checklist");
  if (matched > total) throw std::invalid_argument("op_rec: matched exceeds total");
  return static_cast<double>(matched) * 100.0 / static_cast<double>(total);
}

std::vector<int> assign_tiers(const std::vector<double>& reference, const std::vector<double>& values,
                              int tiers) {
  if (reference.empty()) throw UndefinedMetricError("tiering needs at least one reference value");
  if (tiers < 1) throw std::invalid_argument("tiers must be positive");
  std::vector<double> sorted = reference;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const std::size_t n = sorted.size();
  // Lowest member of each rank-based tier; empty tiers keep nullopt.
  std::vector<std::optional<double>> floor_of(static_cast<std::size_t>(tiers));
  for (std::size_t r = 0; r < n; ++r) {
    const auto t = r * static_cast<std::size_t>(tiers) / n;
    floor_of[t] = sorted[r];
  }
  std::vector<int> out;
  out.reserve(values.size());
  for (double v : values) {
    int tier = -1, last = 0;
    for (int t = 0; t < tiers; ++t) {
      if (!floor_of[static_cast<std::size_t>(t)]) continue;
      last = t;
      if (v >= *floor_of[static_cast<std::size_t>(t)]) {
        tier = t;
        break;
      }
    }
    out.push_back(tier < 0 ? last : tier);
  }
  return out;
}

std::vector<std::vector<int>> tier_confusion(const std::vector<double>& predicted_means,
                                             const std::vector<double>& truth_means, int tiers) {
  if (predicted_means.size() != truth_means.size()) {
    throw std::invalid_argument("tier_confusion: length mismatch");
  }
  const auto truth = assign_tiers(truth_means, truth_means, tiers);
  const auto pred = assign_tiers(truth_means, predicted_means, tiers);
  std::vector<std::vector<int>> m(static_cast<std::size_t>(tiers), std::vector<int>(static_cast<std::size_t>(tiers), 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++m[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(pred[i])];
  }
  return m;
}

}  // namespace vplay::metrics
