#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

// Independent oracles the tests check the implementation against.  These
// stay deliberately naive; none of them share code with the library paths
// they verify.

namespace twp::test {

// Adaptive Simpson quadrature.
inline double simpson(const std::function<double(double)>& f, double a,
                      double b) {
  double c = 0.5 * (a + b);
  return (b - a) / 6.0 * (f(a) + 4.0 * f(c) + f(b));
}

inline double adaptive_simpson(const std::function<double(double)>& f,
                               double a, double b, double tol, int depth) {
  double c = 0.5 * (a + b);
  double whole = simpson(f, a, b);
  double left = simpson(f, a, c);
  double right = simpson(f, c, b);
  if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, c, tol / 2.0, depth - 1) +
         adaptive_simpson(f, c, b, tol / 2.0, depth - 1);
}

// 3-sigma binomial check: is `observed` successes out of `n` compatible
// with probability `p`?
inline bool within_binomial_3sigma(std::size_t observed, std::size_t n,
                                   double p) {
  double mean = p * static_cast<double>(n);
  double sigma = std::sqrt(static_cast<double>(n) * p * (1.0 - p));
  return std::fabs(static_cast<double>(observed) - mean) <= 3.0 * sigma;
}

// Best label agreement over all permutations of cluster labels (exact
// optimal matching for small k).
inline double best_label_agreement(const std::vector<std::size_t>& truth,
                                   const std::vector<std::size_t>& found,
                                   std::size_t k) {
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best = 0;
  do {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
      if (perm[found[i]] == truth[i]) ++hits;
    best = std::max(best, hits);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(truth.size());
}

// Reference type-7 quantile, written independently of twp::quantile.
inline double ref_quantile_type7(std::vector<double> xs, double p) {
  std::sort(xs.begin(), xs.end());
  std::size_t n = xs.size();
  double h = (static_cast<double>(n) - 1.0) * p + 1.0;  // 1-based rank
  std::size_t k = static_cast<std::size_t>(std::floor(h));
  if (k >= n) return xs[n - 1];
  double frac = h - static_cast<double>(k);
  return xs[k - 1] + frac * (xs[k] - xs[k - 1]);
}

}  // namespace twp::test
