#include "twp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace twp {

double mean_of(std::span<const double> xs) {
  if (xs.empty()) throw EmptyInputError("mean of empty input");
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double sample_sd(std::span<const double> xs) {
  if (xs.empty()) throw EmptyInputError("sd of empty input");
  if (xs.size() < 2) return 0.0;
  double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw EmptyInputError("quantile of empty input");
  if (p <= 0.0) return sorted.front();
  if (p >= 1.0) return sorted.back();
  double h = static_cast<double>(sorted.size() - 1) * p;
  std::size_t lo = static_cast<std::size_t>(h);
  double frac = h - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double quantile(std::vector<double> xs, double p) {
  std::sort(xs.begin(), xs.end());
  return quantile_sorted(xs, p);
}

double trimmed_mean_drop_top(std::vector<double> xs, double fraction) {
  if (xs.empty()) throw EmptyInputError("trimmed mean of empty input");
  std::sort(xs.begin(), xs.end());
  std::size_t drop = static_cast<std::size_t>(
      std::floor(static_cast<double>(xs.size()) * fraction));
  if (drop >= xs.size()) drop = xs.size() - 1;
  xs.resize(xs.size() - drop);
  return mean_of(xs);
}

}  // namespace twp
