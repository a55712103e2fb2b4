#pragma once

#include <cmath>
#include <numbers>

#include "dgqmc/errors.hpp"

namespace dgqmc {

/// Riemann zeta for real x > 1, Euler-Maclaurin tail acceleration.
/// Accurate to ~1e-14 relative for x >= 1.05.
inline double riemann_zeta(double x) {
  if (!(x > 1.0)) throw validation_error("riemann_zeta: requires x > 1");
  constexpr int cutoff = 24;
  double sum = 0.0;
  for (int k = 1; k < cutoff; ++k) sum += std::pow(static_cast<double>(k), -x);
  const double n = static_cast<double>(cutoff);
  sum += 0.5 * std::pow(n, -x);
  sum += std::pow(n, 1.0 - x) / (x - 1.0);
  // Bernoulli numbers B_2, B_4, ..., B_12 over (2i)!.
  constexpr double b_over_fact[] = {
      1.0 / 12.0,                 // B2/2!
      -1.0 / 720.0,               // B4/4!
      1.0 / 30240.0,              // B6/6!
      -1.0 / 1209600.0,           // B8/8!
      1.0 / 47900160.0,           // B10/10!
      -691.0 / 1307674368000.0,   // B12/12!
  };
  double rising = x;              // x(x+1)...(x+2i-2)
  double npow = std::pow(n, -x - 1.0);
  for (int i = 0; i < 6; ++i) {
    sum += b_over_fact[i] * rising * npow;
    rising *= (x + 2.0 * i + 1.0) * (x + 2.0 * i + 2.0);
    npow /= n * n;
  }
  return sum;
}

/// Standard normal density.
inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// Standard normal CDF via the complementary error function.
inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// Inverse standard normal CDF. Rational approximation (Acklam) polished by
/// two Halley steps against the erfc-based CDF; |Phi(result) - w| stays below
/// 1e-15 over [1e-10, 1 - 1e-10].
inline double inverse_normal_cdf(double w) {
  if (!(w > 0.0 && w < 1.0))
    throw validation_error("inverse_normal_cdf: argument must lie in (0,1)");

  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (w < p_low) {
    const double q = std::sqrt(-2.0 * std::log(w));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (w <= 1.0 - p_low) {
    const double q = w - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - w));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  for (int it = 0; it < 2; ++it) {
    const double err = normal_cdf(x) - w;
    const double u = err / normal_pdf(x);
    x -= u / (1.0 + 0.5 * x * u);  // Halley
  }
  return x;
}

}  // namespace dgqmc
