#pragma once

namespace twp {

// Log-gamma, Lanczos approximation (g=7, n=9), accurate to ~1e-13 for x > 0.
double log_gamma(double x);

// Digamma and trigamma via recurrence up to x >= 6 plus the asymptotic series.
double digamma(double x);
double trigamma(double x);

// Regularized lower incomplete gamma P(a, x): series for x < a+1, continued
// fraction otherwise.
double gamma_p(double a, double x);

// Standard normal cdf.
double normal_cdf(double z);

}  // namespace twp
