#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace ucl {

inline constexpr double sqrt2 = std::numbers::sqrt2_v<double>;
inline constexpr double two_pi = 2.0 * std::numbers::pi_v<double>;

inline double norm_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(two_pi);
}

inline double norm_cdf(double z) {
  return 0.5 * std::erfc(-z / sqrt2);
}

/// P(Z >= z) for a standard normal, accurate in the far tail.
inline double norm_upper_tail(double z) {
  return 0.5 * std::erfc(z / sqrt2);
}

namespace detail {

// Rational approximation of the standard normal quantile (Acklam's
// coefficients), good to ~1e-9 before refinement.
inline double inv_norm_cdf_seed(double p) {
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

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double q = std::sqrt(-2.0 * std::log(1.0 - p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

} // namespace detail

/// Standard normal quantile: z with Phi(z) = p.  Rational seed refined by
/// two Newton steps against the erfc-based cdf; |Phi(z) - p| <= 1e-9 on
/// p in [1e-9, 1 - 1e-9].
inline double inv_norm_cdf(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("inv_norm_cdf: p must lie in (0, 1)");
  double z = detail::inv_norm_cdf_seed(p);
  for (int i = 0; i < 2; ++i) {
    // Work in whichever tail is smaller so the residual keeps full precision.
    const double err =
        p <= 0.5 ? norm_cdf(z) - p : (1.0 - p) - norm_upper_tail(z);
    const double pdf = norm_pdf(z);
    if (pdf <= std::numeric_limits<double>::min()) break;
    z -= err / pdf;
  }
  return z;
}

} // namespace ucl
