#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "twp/rng.hpp"

namespace twp {

// The candidate delay-distribution families, ranked against each other by
// the Anderson-Darling statistic.
enum class DistFamily {
  Gamma,
  Lognormal,
  Lognormal3,
  Loglogistic3,
  Weibull,
  Weibull3,
  Normal,
  Exponential2,  // two-parameter (shifted) exponential
};

const char* family_name(DistFamily f);
std::optional<DistFamily> family_from_string(const std::string& name);
int family_param_count(DistFamily f);
std::vector<DistFamily> all_families();

class DistError : public std::runtime_error {
 public:
  enum class Kind {
    OutOfSupport,
    SupportViolation,
    DegenerateData,
    TooFewSamples,
    WrongFamily,
    BadFraction,
    BadParams,
  };
  DistError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct DistParams {
  DistFamily family = DistFamily::Gamma;
  double shape = 0.0;      // lambda: Gamma, Weibull, Weibull3
  double scale = 0.0;      // theta; log-sd for lognormal, logistic scale for loglogistic
  double location = 0.0;   // mu: log-location (lognormal/loglogistic), mean (normal)
  double threshold = 0.0;  // support is x > threshold for thresholded families

  void validate() const;
  // Infimum of the support (threshold, 0, or -inf for Normal).
  double support_lo() const;
};

double pdf(const DistParams& p, double x);  // throws OutOfSupport outside
double cdf(const DistParams& p, double x);  // 0 at or below the support infimum
// Inverse cdf by bisection; p in (0, 1).
double quantile_of(const DistParams& p, double prob);

double sample_one(const DistParams& p, Rng& rng);
std::vector<double> sample(const DistParams& p, Rng& rng, std::size_t n);

// Maximum-likelihood fit.  Closed forms where they exist, digamma/profile
// Newton for Gamma/Weibull, and for the 3-parameter families a 200-point
// threshold grid with conditional 2-parameter MLE refined by golden section.
DistParams fit_mle(DistFamily family, std::span<const double> data);

// A^2 over the fitted cdf of sorted data; cdf values are clamped to
// [1e-15, 1 - 1e-15] before the logs.
double anderson_darling(std::span<const double> data, const DistParams& p);
double anderson_darling(std::span<const double> data,
                        const std::function<double(double)>& cdf_fn);

struct FitResult {
  DistParams params;
  double ad_stat = 0.0;
  std::size_t n = 0;
};

struct SkippedFit {
  DistFamily family;
  std::string reason;
};

struct RankResult {
  std::vector<FitResult> ranked;  // ascending A^2, ties to fewer parameters
  std::vector<SkippedFit> skipped;
};

RankResult rank_fits(std::span<const double> data,
                     std::span<const DistFamily> families);

struct GammaMoments {
  double mean;
  double variance;
  double skewness;
  double excess_kurtosis;
};

GammaMoments gamma_moments(const DistParams& p);  // WrongFamily unless Gamma

std::size_t subsample_count(std::size_t n, double fraction);
// Uniform sample without replacement of ceil(fraction * n) elements.
std::vector<double> subsample(std::span<const double> data, double fraction,
                              Rng& rng);

}  // namespace twp
