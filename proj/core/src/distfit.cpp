#include "twp/distfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "twp/specfun.hpp"
#include "twp/stats.hpp"

namespace twp {

namespace {

constexpr double kCdfClamp = 1e-15;
constexpr double kInf = std::numeric_limits<double>::infinity();

double stable_sigmoid(double w) {
  if (w >= 0.0) return 1.0 / (1.0 + std::exp(-w));
  double e = std::exp(w);
  return e / (1.0 + e);
}

double log1p_exp(double w) {  // ln(1 + e^w) without overflow
  if (w > 0.0) return w + std::log1p(std::exp(-w));
  return std::log1p(std::exp(w));
}

struct Moments {
  double mean = 0.0, min = 0.0, max = 0.0;
};

Moments basic_moments(std::span<const double> xs) {
  Moments m;
  m.min = kInf;
  m.max = -kInf;
  double sum = 0.0;
  for (double x : xs) {
    sum += x;
    m.min = std::min(m.min, x);
    m.max = std::max(m.max, x);
  }
  m.mean = sum / static_cast<double>(xs.size());
  return m;
}

}  // namespace

const char* family_name(DistFamily f) {
  switch (f) {
    case DistFamily::Gamma: return "Gamma";
    case DistFamily::Lognormal: return "Lognormal";
    case DistFamily::Lognormal3: return "3-Parameter Lognormal";
    case DistFamily::Loglogistic3: return "3-Parameter Loglogistic";
    case DistFamily::Weibull: return "Weibull";
    case DistFamily::Weibull3: return "3-Parameter Weibull";
    case DistFamily::Normal: return "Normal";
    case DistFamily::Exponential2: return "2-Parameter Exponential";
  }
  return "?";
}

std::optional<DistFamily> family_from_string(const std::string& name) {
  std::string k;
  for (char c : name) {
    if (c == '-' || c == '_' || c == ' ') continue;
    k += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (k == "gamma") return DistFamily::Gamma;
  if (k == "lognormal") return DistFamily::Lognormal;
  if (k == "lognormal3" || k == "3parameterlognormal" || k == "3parlognormal")
    return DistFamily::Lognormal3;
  if (k == "loglogistic3" || k == "3parameterloglogistic" ||
      k == "3parloglogistic")
    return DistFamily::Loglogistic3;
  if (k == "weibull") return DistFamily::Weibull;
  if (k == "weibull3" || k == "3parameterweibull" || k == "3parweibull")
    return DistFamily::Weibull3;
  if (k == "normal") return DistFamily::Normal;
  if (k == "exponential2" || k == "2parameterexponential" ||
      k == "2parexponential")
    return DistFamily::Exponential2;
  return std::nullopt;
}

int family_param_count(DistFamily f) {
  switch (f) {
    case DistFamily::Lognormal3:
    case DistFamily::Loglogistic3:
    case DistFamily::Weibull3: return 3;
    default: return 2;
  }
}

std::vector<DistFamily> all_families() {
  return {DistFamily::Gamma,     DistFamily::Lognormal,
          DistFamily::Lognormal3, DistFamily::Loglogistic3,
          DistFamily::Weibull,   DistFamily::Weibull3,
          DistFamily::Normal,    DistFamily::Exponential2};
}

void DistParams::validate() const {
  auto bad = [&](const std::string& what) {
    throw DistError(DistError::Kind::BadParams,
                    std::string(family_name(family)) + ": " + what);
  };
  switch (family) {
    case DistFamily::Gamma:
    case DistFamily::Weibull:
    case DistFamily::Weibull3:
      if (!(shape > 0.0)) bad("shape must be > 0");
      if (!(scale > 0.0)) bad("scale must be > 0");
      break;
    case DistFamily::Lognormal:
    case DistFamily::Lognormal3:
    case DistFamily::Loglogistic3:
    case DistFamily::Normal:
    case DistFamily::Exponential2:
      if (!(scale > 0.0)) bad("scale must be > 0");
      break;
  }
}

double DistParams::support_lo() const {
  switch (family) {
    case DistFamily::Gamma:
    case DistFamily::Lognormal:
    case DistFamily::Weibull: return 0.0;
    case DistFamily::Lognormal3:
    case DistFamily::Loglogistic3:
    case DistFamily::Weibull3:
    case DistFamily::Exponential2: return threshold;
    case DistFamily::Normal: return -kInf;
  }
  return -kInf;
}

double pdf(const DistParams& p, double x) {
  p.validate();
  double lo = p.support_lo();
  if (x <= lo)
    throw DistError(DistError::Kind::OutOfSupport,
                    std::string(family_name(p.family)) + ": x=" +
                        std::to_string(x) + " outside support");
  switch (p.family) {
    case DistFamily::Gamma:
      return std::exp((p.shape - 1.0) * std::log(x) - x / p.scale -
                      log_gamma(p.shape) - p.shape * std::log(p.scale));
    case DistFamily::Lognormal:
    case DistFamily::Lognormal3: {
      double z = x - lo;
      double w = (std::log(z) - p.location) / p.scale;
      return std::exp(-0.5 * w * w) / (z * p.scale * std::sqrt(2.0 * M_PI));
    }
    case DistFamily::Loglogistic3: {
      double z = x - lo;
      double w = (std::log(z) - p.location) / p.scale;
      double F = stable_sigmoid(w);
      return F * (1.0 - F) / (p.scale * z);
    }
    case DistFamily::Weibull:
    case DistFamily::Weibull3: {
      double z = (x - lo) / p.scale;
      return p.shape / p.scale * std::pow(z, p.shape - 1.0) *
             std::exp(-std::pow(z, p.shape));
    }
    case DistFamily::Normal: {
      double w = (x - p.location) / p.scale;
      return std::exp(-0.5 * w * w) / (p.scale * std::sqrt(2.0 * M_PI));
    }
    case DistFamily::Exponential2:
      return std::exp(-(x - lo) / p.scale) / p.scale;
  }
  return 0.0;
}

double cdf(const DistParams& p, double x) {
  p.validate();
  double lo = p.support_lo();
  if (x <= lo) return 0.0;
  switch (p.family) {
    case DistFamily::Gamma:
      return gamma_p(p.shape, x / p.scale);
    case DistFamily::Lognormal:
    case DistFamily::Lognormal3:
      return normal_cdf((std::log(x - lo) - p.location) / p.scale);
    case DistFamily::Loglogistic3:
      return stable_sigmoid((std::log(x - lo) - p.location) / p.scale);
    case DistFamily::Weibull:
    case DistFamily::Weibull3:
      return -std::expm1(-std::pow((x - lo) / p.scale, p.shape));
    case DistFamily::Normal:
      return normal_cdf((x - p.location) / p.scale);
    case DistFamily::Exponential2:
      return -std::expm1(-(x - lo) / p.scale);
  }
  return 0.0;
}

double quantile_of(const DistParams& p, double prob) {
  p.validate();
  if (!(prob > 0.0 && prob < 1.0))
    throw DistError(DistError::Kind::BadParams, "quantile prob must be in (0,1)");
  double lo, hi;
  if (p.family == DistFamily::Normal) {
    lo = p.location - 20.0 * p.scale;
    hi = p.location + 20.0 * p.scale;
  } else {
    lo = p.support_lo();
    hi = lo + std::max(p.scale, 1.0);
    while (cdf(p, hi) < prob && hi - lo < 1e300) hi = lo + 2.0 * (hi - lo);
  }
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (cdf(p, mid) < prob)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Sampling

namespace {

double sample_std_normal(Rng& rng) {
  double u1 = uniform_pos(rng);
  double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Marsaglia-Tsang squeeze, with the shape < 1 boost.
double sample_gamma_unit(double shape, Rng& rng) {
  if (shape < 1.0) {
    double u = uniform_pos(rng);
    return sample_gamma_unit(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
  }
  double d = shape - 1.0 / 3.0;
  double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = sample_std_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    double u = uniform_pos(rng);
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double sample_exp_unit(Rng& rng) {
  double e;
  do {
    e = -std::log(uniform_pos(rng));
  } while (e == 0.0);
  return e;
}

}  // namespace

double sample_one(const DistParams& p, Rng& rng) {
  switch (p.family) {
    case DistFamily::Gamma:
      return p.scale * sample_gamma_unit(p.shape, rng);
    case DistFamily::Lognormal:
    case DistFamily::Lognormal3:
      return p.support_lo() == -kInf
                 ? std::exp(p.location + p.scale * sample_std_normal(rng))
                 : p.support_lo() +
                       std::exp(p.location + p.scale * sample_std_normal(rng));
    case DistFamily::Loglogistic3: {
      double u;
      do {
        u = uniform01(rng);
      } while (u <= 0.0);
      return p.threshold +
             std::exp(p.location + p.scale * std::log(u / (1.0 - u)));
    }
    case DistFamily::Weibull:
    case DistFamily::Weibull3:
      return p.support_lo() == 0.0
                 ? p.scale * std::pow(sample_exp_unit(rng), 1.0 / p.shape)
                 : p.threshold +
                       p.scale * std::pow(sample_exp_unit(rng), 1.0 / p.shape);
    case DistFamily::Normal:
      return p.location + p.scale * sample_std_normal(rng);
    case DistFamily::Exponential2:
      return p.threshold + p.scale * sample_exp_unit(rng);
  }
  return 0.0;
}

std::vector<double> sample(const DistParams& p, Rng& rng, std::size_t n) {
  p.validate();
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_one(p, rng));
  return out;
}

// ---------------------------------------------------------------------------
// Maximum likelihood

namespace {

double loglik_of(const DistParams& p, std::span<const double> data) {
  double ll = 0.0;
  for (double x : data) {
    double f = pdf(p, x);
    if (!(f > 0.0)) return -kInf;
    ll += std::log(f);
  }
  return ll;
}

DistParams fit_gamma(std::span<const double> data) {
  double n = static_cast<double>(data.size());
  double sum = 0.0, sum_log = 0.0;
  for (double x : data) {
    sum += x;
    sum_log += std::log(x);
  }
  double mean = sum / n, mean_log = sum_log / n;
  double s = std::log(mean) - mean_log;
  if (!(s > 0.0))
    throw DistError(DistError::Kind::DegenerateData,
                    "Gamma: log-moment gap is zero (constant data?)");
  // Minka's closed-form start, then Newton on log(a) - digamma(a) = s.
  double a = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) /
             (12.0 * s);
  for (int i = 0; i < 50; ++i) {
    double f = std::log(a) - digamma(a) - s;
    double fp = 1.0 / a - trigamma(a);
    double a1 = a - f / fp;
    if (a1 <= 0.0) a1 = a / 2.0;
    if (std::fabs(a1 - a) < 1e-13 * a) {
      a = a1;
      break;
    }
    a = a1;
  }
  return DistParams{DistFamily::Gamma, a, mean / a, 0.0, 0.0};
}

DistParams fit_normal(std::span<const double> data) {
  double n = static_cast<double>(data.size());
  double mean = 0.0;
  for (double x : data) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : data) ss += (x - mean) * (x - mean);
  double sd = std::sqrt(ss / n);
  if (!(sd > 0.0))
    throw DistError(DistError::Kind::DegenerateData, "Normal: zero variance");
  return DistParams{DistFamily::Normal, 0.0, sd, mean, 0.0};
}

DistParams fit_lognormal(std::span<const double> data, double threshold,
                         DistFamily family) {
  double n = static_cast<double>(data.size());
  double mean = 0.0;
  for (double x : data) mean += std::log(x - threshold);
  mean /= n;
  double ss = 0.0;
  for (double x : data) {
    double d = std::log(x - threshold) - mean;
    ss += d * d;
  }
  double sd = std::sqrt(ss / n);
  if (!(sd > 0.0))
    throw DistError(DistError::Kind::DegenerateData,
                    "Lognormal: zero variance in logs");
  return DistParams{family, 0.0, sd, mean, threshold};
}

DistParams fit_weibull(std::span<const double> data, double threshold,
                       DistFamily family) {
  double n = static_cast<double>(data.size());
  double log_max = -kInf;
  std::vector<double> logs;
  logs.reserve(data.size());
  double mean_log = 0.0;
  for (double x : data) {
    double lx = std::log(x - threshold);
    logs.push_back(lx);
    mean_log += lx;
    log_max = std::max(log_max, lx);
  }
  mean_log /= n;

  double sd_log = 0.0;
  for (double lx : logs) sd_log += (lx - mean_log) * (lx - mean_log);
  sd_log = std::sqrt(sd_log / n);
  if (!(sd_log > 0.0))
    throw DistError(DistError::Kind::DegenerateData,
                    "Weibull: zero variance in logs");

  // Profile equation g(k) = (sum w ln x / sum w) - 1/k - mean_log = 0 with
  // w = (x/max)^k; the max-scaling keeps the sums finite for any k.
  double k = 1.28255 / sd_log;  // pi / sqrt(6) moment start
  k = std::clamp(k, 0.02, 500.0);
  for (int i = 0; i < 200; ++i) {
    double sw = 0.0, swl = 0.0, swll = 0.0;
    for (double lx : logs) {
      double w = std::exp(k * (lx - log_max));
      sw += w;
      swl += w * lx;
      swll += w * lx * lx;
    }
    double a = swl / sw;
    double g = a - 1.0 / k - mean_log;
    double gp = (swll * sw - swl * swl) / (sw * sw) + 1.0 / (k * k);
    double k1 = k - g / gp;
    if (k1 <= 0.0) k1 = k / 2.0;
    if (std::fabs(k1 - k) < 1e-12 * k) {
      k = k1;
      break;
    }
    k = k1;
  }
  double sw = 0.0;
  for (double lx : logs) sw += std::exp(k * (lx - log_max));
  double lambda = std::exp(log_max) * std::pow(sw / n, 1.0 / k);
  return DistParams{family, k, lambda, 0.0, threshold};
}

DistParams fit_exponential2(std::span<const double> data) {
  auto m = basic_moments(data);
  double n = static_cast<double>(data.size());
  // Bias-corrected min threshold keeps the smallest point strictly inside
  // the support.
  double threshold = m.min - (m.mean - m.min) / (n - 1.0);
  double scale = m.mean - threshold;
  if (!(scale > 0.0))
    throw DistError(DistError::Kind::DegenerateData,
                    "Exponential2: zero spread");
  return DistParams{DistFamily::Exponential2, 0.0, scale, 0.0, threshold};
}

// Logistic MLE on y = ln(x - threshold); damped Newton on the score.
DistParams fit_loglogistic(std::span<const double> data, double threshold) {
  std::vector<double> y;
  y.reserve(data.size());
  for (double x : data) y.push_back(std::log(x - threshold));
  double n = static_cast<double>(y.size());

  std::vector<double> sorted = y;
  std::sort(sorted.begin(), sorted.end());
  double mu = quantile_sorted(sorted, 0.5);
  double s = sample_sd(y) * std::sqrt(3.0) / M_PI;
  if (!(s > 0.0))
    throw DistError(DistError::Kind::DegenerateData,
                    "Loglogistic: zero variance in logs");

  auto loglik = [&](double mu_, double s_) {
    double ll = -n * std::log(s_);
    for (double yi : y) {
      double z = (yi - mu_) / s_;
      ll += -z - 2.0 * log1p_exp(-z);
    }
    return ll;
  };

  double ll = loglik(mu, s);
  for (int it = 0; it < 100; ++it) {
    // Score: g1 = sum(2F-1), g2 = sum z(2F-1) - n; Jacobian = -(1/s) K.
    double g1 = 0.0, g2 = 0.0, k11 = 0.0, k12 = 0.0, k21 = 0.0, k22 = 0.0;
    for (double yi : y) {
      double z = (yi - mu) / s;
      double F = stable_sigmoid(z);
      double u = 2.0 * F - 1.0;
      double Fp = F * (1.0 - F);
      g1 += u;
      g2 += z * u;
      k11 += 2.0 * Fp;
      k12 += 2.0 * z * Fp;
      k21 += u + 2.0 * z * Fp;
      k22 += z * u + 2.0 * z * z * Fp;
    }
    g2 -= n;
    double det = k11 * k22 - k12 * k21;
    if (std::fabs(det) < 1e-30) break;
    double dmu = s * (k22 * g1 - k12 * g2) / det;
    double ds = s * (k11 * g2 - k21 * g1) / det;

    bool moved = false;
    for (double step = 1.0; step > 1e-12; step *= 0.5) {
      double mu1 = mu + step * dmu;
      double s1 = s + step * ds;
      if (s1 <= 0.0) continue;
      double ll1 = loglik(mu1, s1);
      if (ll1 >= ll - 1e-12 * std::fabs(ll)) {
        moved = std::fabs(mu1 - mu) > 1e-12 * (1.0 + std::fabs(mu)) ||
                std::fabs(s1 - s) > 1e-12 * s;
        mu = mu1;
        s = s1;
        ll = ll1;
        break;
      }
    }
    if (!moved) break;
  }
  return DistParams{DistFamily::Loglogistic3, 0.0, s, mu, threshold};
}

// Threshold profile for the 3-parameter families: 200-point grid over
// [min - range, min - eps] then golden-section refinement.
DistParams fit_threshold_family(
    std::span<const double> data,
    const std::function<DistParams(double)>& conditional) {
  auto m = basic_moments(data);
  double range = m.max - m.min;
  if (!(range > 0.0))
    throw DistError(DistError::Kind::DegenerateData, "zero data range");
  double lo = m.min - range;
  double hi = m.min - 1e-6 * range;

  auto profile = [&](double theta) -> std::pair<double, DistParams> {
    try {
      DistParams p = conditional(theta);
      return {loglik_of(p, data), p};
    } catch (const DistError&) {
      return {-kInf, DistParams{}};
    }
  };

  constexpr int kGrid = 200;
  int best_i = 0;
  double best_ll = -kInf;
  DistParams best_params{};
  for (int i = 0; i < kGrid; ++i) {
    double theta = lo + (hi - lo) * i / (kGrid - 1);
    auto [ll, p] = profile(theta);
    if (ll > best_ll) {
      best_ll = ll;
      best_i = i;
      best_params = p;
    }
  }
  if (best_ll == -kInf)
    throw DistError(DistError::Kind::DegenerateData,
                    "threshold profile never converged");

  double a = lo + (hi - lo) * std::max(0, best_i - 1) / (kGrid - 1);
  double b = lo + (hi - lo) * std::min(kGrid - 1, best_i + 1) / (kGrid - 1);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  auto [fc, pc] = profile(c);
  auto [fd, pd] = profile(d);
  for (int i = 0; i < 60 && b - a > 1e-10 * range; ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      pd = pc;
      c = b - gr * (b - a);
      std::tie(fc, pc) = profile(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      pc = pd;
      d = a + gr * (b - a);
      std::tie(fd, pd) = profile(d);
    }
  }
  if (fc > best_ll) {
    best_ll = fc;
    best_params = pc;
  }
  if (fd > best_ll) {
    best_ll = fd;
    best_params = pd;
  }
  return best_params;
}

}  // namespace

DistParams fit_mle(DistFamily family, std::span<const double> data) {
  if (data.size() < 30)
    throw DistError(DistError::Kind::TooFewSamples,
                    "need at least 30 samples, got " +
                        std::to_string(data.size()));
  auto m = basic_moments(data);
  if (!(m.max > m.min))
    throw DistError(DistError::Kind::DegenerateData, "constant data");

  bool positive_support = family == DistFamily::Gamma ||
                          family == DistFamily::Lognormal ||
                          family == DistFamily::Weibull;
  if (positive_support && m.min <= 0.0)
    throw DistError(DistError::Kind::SupportViolation,
                    std::string(family_name(family)) +
                        ": data must be strictly positive");

  switch (family) {
    case DistFamily::Gamma: return fit_gamma(data);
    case DistFamily::Lognormal:
      return fit_lognormal(data, 0.0, DistFamily::Lognormal);
    case DistFamily::Normal: return fit_normal(data);
    case DistFamily::Weibull:
      return fit_weibull(data, 0.0, DistFamily::Weibull);
    case DistFamily::Exponential2: return fit_exponential2(data);
    case DistFamily::Lognormal3:
      return fit_threshold_family(data, [&](double theta) {
        return fit_lognormal(data, theta, DistFamily::Lognormal3);
      });
    case DistFamily::Weibull3:
      return fit_threshold_family(data, [&](double theta) {
        return fit_weibull(data, theta, DistFamily::Weibull3);
      });
    case DistFamily::Loglogistic3:
      return fit_threshold_family(
          data, [&](double theta) { return fit_loglogistic(data, theta); });
  }
  throw DistError(DistError::Kind::BadParams, "unknown family");
}

double anderson_darling(std::span<const double> data,
                        const std::function<double(double)>& cdf_fn) {
  if (data.empty()) throw EmptyInputError("anderson_darling: empty data");
  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  std::size_t n = sorted.size();
  std::vector<double> F(n);
  for (std::size_t i = 0; i < n; ++i)
    F[i] = std::clamp(cdf_fn(sorted[i]), kCdfClamp, 1.0 - kCdfClamp);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += (2.0 * static_cast<double>(i) + 1.0) *
           (std::log(F[i]) + std::log1p(-F[n - 1 - i]));
  }
  return -static_cast<double>(n) - sum / static_cast<double>(n);
}

double anderson_darling(std::span<const double> data, const DistParams& p) {
  p.validate();
  double lo = p.support_lo();
  for (double x : data) {
    if (x <= lo)
      throw DistError(DistError::Kind::SupportViolation,
                      "sample " + std::to_string(x) +
                          " at or below the support infimum");
  }
  return anderson_darling(data,
                          [&](double x) { return cdf(p, x); });
}

RankResult rank_fits(std::span<const double> data,
                     std::span<const DistFamily> families) {
  RankResult out;
  for (DistFamily f : families) {
    try {
      FitResult r;
      r.params = fit_mle(f, data);
      r.ad_stat = anderson_darling(data, r.params);
      r.n = data.size();
      out.ranked.push_back(r);
    } catch (const std::exception& e) {
      out.skipped.push_back(SkippedFit{f, e.what()});
    }
  }
  std::stable_sort(out.ranked.begin(), out.ranked.end(),
                   [](const FitResult& a, const FitResult& b) {
                     if (a.ad_stat != b.ad_stat) return a.ad_stat < b.ad_stat;
                     return family_param_count(a.params.family) <
                            family_param_count(b.params.family);
                   });
  return out;
}

GammaMoments gamma_moments(const DistParams& p) {
  if (p.family != DistFamily::Gamma)
    throw DistError(DistError::Kind::WrongFamily,
                    std::string("gamma_moments on ") + family_name(p.family));
  p.validate();
  return GammaMoments{p.shape * p.scale, p.shape * p.scale * p.scale,
                      2.0 / std::sqrt(p.shape), 6.0 / p.shape};
}

std::size_t subsample_count(std::size_t n, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw DistError(DistError::Kind::BadFraction,
                    "fraction must be in (0, 1], got " +
                        std::to_string(fraction));
  return static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(n)));
}

std::vector<double> subsample(std::span<const double> data, double fraction,
                              Rng& rng) {
  std::size_t k = subsample_count(data.size(), fraction);
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  // Partial Fisher-Yates: the first k slots are a uniform draw without
  // replacement.
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + uniform_below(rng, idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  std::vector<double> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(data[idx[i]]);
  return out;
}

}  // namespace twp
