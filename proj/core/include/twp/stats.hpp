#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace twp {

class EmptyInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double mean_of(std::span<const double> xs);
// Sample standard deviation, n-1 denominator; 0 for n < 2.
double sample_sd(std::span<const double> xs);

// Type-7 quantile: linear interpolation at rank h = (n-1)p + 1 over the
// sorted input.
double quantile_sorted(std::span<const double> sorted, double p);
double quantile(std::vector<double> xs, double p);

// Mean after dropping the top `fraction` of values (floor(n*fraction) of
// them, largest first).
double trimmed_mean_drop_top(std::vector<double> xs, double fraction);

}  // namespace twp
