#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>

#include "rwmc/error.hpp"

// Distribution functions and quantiles needed for confidence regions:
// chi-square, F and Hotelling's T-squared. CDFs come from the regularized
// incomplete gamma and beta functions (series plus Lentz continued
// fractions); quantiles invert the CDF by bracketed bisection to a relative
// width of 1e-13, comfortably inside a 1e-10 absolute tolerance for the
// moderate quantiles used here.
namespace rwmc {

namespace detail {

inline constexpr int kMaxIter = 100000;
inline constexpr double kEps = 1e-16;
inline constexpr double kTiny = 1e-300;

// Lower regularized gamma by series, valid for x < a + 1.
inline double gamma_series(double a, double x) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int n = 0; n < kMaxIter; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized gamma by continued fraction, valid for x >= a + 1.
inline double gamma_cf(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

inline double beta_cf(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < kMaxIter; ++m) {
    const int m2 = 2 * m;
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
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

// Smallest x in [0, inf) with cdf(x) >= prob, for a continuous increasing cdf.
inline double invert_cdf(const std::function<double(double)>& cdf, double prob) {
  double lo = 0.0;
  double hi = 1.0;
  while (cdf(hi) < prob) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw Error("quantile bracket diverged");
  }
  for (int i = 0; i < 400 && hi - lo > 1e-13 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < prob)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

inline void check_prob(double prob) {
  if (!(prob > 0.0 && prob < 1.0)) throw InvalidArgument("probability must lie in (0, 1)");
}

}  // namespace detail

/// Regularized lower incomplete gamma P(a, x).
inline double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw InvalidArgument("gamma shape must be positive");
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) return detail::gamma_series(a, x);
  return 1.0 - detail::gamma_cf(a, x);
}

/// Regularized incomplete beta I_x(a, b).
inline double regularized_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw InvalidArgument("beta parameters must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_cf(a, b, x) / a;
  return 1.0 - front * detail::beta_cf(b, a, 1.0 - x) / b;
}

inline double chi2_cdf(double x, double df) { return regularized_gamma_p(0.5 * df, 0.5 * x); }

inline double chi2_quantile(double prob, double df) {
  detail::check_prob(prob);
  if (!(df > 0.0)) throw InvalidArgument("chi-square degrees of freedom must be positive");
  return detail::invert_cdf([df](double x) { return chi2_cdf(x, df); }, prob);
}

inline double f_cdf(double x, double d1, double d2) {
  if (x <= 0.0) return 0.0;
  return regularized_beta(0.5 * d1, 0.5 * d2, d1 * x / (d1 * x + d2));
}

inline double f_quantile(double prob, double d1, double d2) {
  detail::check_prob(prob);
  if (!(d1 > 0.0 && d2 > 0.0)) throw InvalidArgument("F degrees of freedom must be positive");
  return detail::invert_cdf([d1, d2](double x) { return f_cdf(x, d1, d2); }, prob);
}

/// Quantile of Hotelling's T^2 with dimension p and q degrees of freedom:
/// p q / (q - p + 1) times the F(p, q - p + 1) quantile.
inline double hotelling_t2_quantile(double prob, std::size_t p, std::size_t q) {
  if (p == 0) throw InvalidArgument("dimension must be positive");
  if (q < p) throw InvalidArgument("insufficient batches for region: need q >= p");
  const double pd = static_cast<double>(p);
  const double qd = static_cast<double>(q);
  const double d2 = qd - pd + 1.0;
  return pd * qd / d2 * f_quantile(prob, pd, d2);
}

}  // namespace rwmc
