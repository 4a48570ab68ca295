#pragma once

#include <cmath>
#include <limits>

#include "certify/errors.hpp"

namespace certify {

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

namespace detail {

inline double poly(const double* c, int n, double x) {
  double v = c[n - 1];
  for (int i = n - 2; i >= 0; --i) v = v * x + c[i];
  return v;
}

}  // namespace detail

// Inverse standard normal CDF, AS 241 rational approximations (PPND16),
// accurate to about 1e-16 over (0, 1).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    throw DimensionMismatch("normal_quantile: p outside [0, 1]");
  }
  static const double a[8] = {
      3.3871328727963666080e0,  1.3314166789178437745e+2,
      1.9715909503065514427e+3, 1.3731693765509461125e+4,
      4.5921953931549871457e+4, 6.7265770927008700853e+4,
      3.3430575583588128105e+4, 2.5090809287301226727e+3};
  static const double b[8] = {
      1.0,                      4.2313330701600911252e+1,
      6.8718700749205790830e+2, 5.3941960214247511077e+3,
      2.1213794301586595867e+4, 3.9307895800092710610e+4,
      2.8729085735721942674e+4, 5.2264952788528545610e+3};
  static const double c[8] = {
      1.42343711074968357734e0,  4.63033784615654529590e0,
      5.76949722146069140550e0,  3.64784832476320460504e0,
      1.27045825245236838258e0,  2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static const double d[8] = {
      1.0,                       2.05319162663775882187e0,
      1.67638483018380384940e0,  6.89767334985100004550e-1,
      1.48103976427480074590e-1, 1.51986665636164571966e-2,
      5.47593808499534494600e-4, 1.05075007164441684324e-9};
  static const double e[8] = {
      6.65790464350110377720e0,  5.46378491116411436990e0,
      1.78482653991729133580e0,  2.96560571828504891230e-1,
      2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static const double f[8] = {
      1.0,                       5.99832206555887937690e-1,
      1.36929880922735805310e-1, 1.48753612908506148525e-2,
      7.86869131145613259100e-4, 1.84631831751005468180e-6,
      1.42151175831644588870e-15, 0.0};

  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * detail::poly(a, 8, r) / detail::poly(b, 8, r);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = detail::poly(c, 8, r) / detail::poly(d, 8, r);
  } else {
    r -= 5.0;
    val = detail::poly(e, 8, r) / detail::poly(f, 8, r);
  }
  return q < 0.0 ? -val : val;
}

namespace detail {

// Lentz continued fraction for the incomplete beta (Numerical Recipes form).
inline double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 1000;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw NumericalFailure("beta_cf: continued fraction did not converge");
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw DimensionMismatch("incomplete beta: a and b must be positive");
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DimensionMismatch("incomplete beta: x outside [0, 1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * detail::beta_cf(a, b, x) / a;
  }
  return 1.0 - front * detail::beta_cf(b, a, 1.0 - x) / b;
}

// Solves I_x(a, b) = p for x with bisection-safeguarded Newton. `guess`
// warm-starts the search when the caller tracks a slowly moving quantile.
inline double inverse_regularized_incomplete_beta(double a, double b, double p,
                                                  double guess = -1.0) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DimensionMismatch("inverse incomplete beta: p outside [0, 1]");
  }
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  const double ln_norm =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  double lo = 0.0;
  double hi = 1.0;
  double x = (guess > 0.0 && guess < 1.0) ? guess : 0.5;
  for (int it = 0; it < 200; ++it) {
    const double f = regularized_incomplete_beta(a, b, x) - p;
    if (f >= 0.0) hi = x;
    if (f <= 0.0) lo = x;
    if (hi - lo <= 4e-16 * hi) break;
    const double ln_pdf =
        ln_norm + (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x);
    double next = x - f * std::exp(-ln_pdf);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-16 * x) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

// Shannon entropy of a Bernoulli(p), normalized to [0, 1] with base-2 logs.
inline double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DimensionMismatch("binary_entropy: p outside [0, 1]");
  }
  if (p == 0.0 || p == 1.0) return 0.0;
  return -(p * std::log(p) + (1.0 - p) * std::log(1.0 - p)) / std::log(2.0);
}

}  // namespace certify
