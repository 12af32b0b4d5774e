#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace optistat {

/// Smallest p-value printed as non-zero.
inline constexpr double kPrecisionFloor = 2.220446e-16;

inline bool underflows(double p) { return p < kPrecisionFloor; }

namespace dist {

inline double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

/// P(Z > z) for standard normal Z.
inline double normal_sf(double z) { return 0.5 * boost::math::erfc(z / std::sqrt(2.0)); }
inline double normal_cdf(double z) { return 0.5 * boost::math::erfc(-z / std::sqrt(2.0)); }
inline double normal_two_sided(double z) { return clamp01(2.0 * normal_sf(std::fabs(z))); }

inline double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<>(), p);
}

inline double chi2_sf(double x, double df) {
  if (x <= 0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(df / 2.0, x / 2.0);
}

inline double f_sf(double x, double d1, double d2) {
  if (x <= 0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::ibetac(d1 / 2.0, d2 / 2.0, d1 * x / (d1 * x + d2));
}

inline double f_quantile(double p, double d1, double d2) {
  return boost::math::quantile(boost::math::fisher_f_distribution<>(d1, d2), p);
}

/// Two-sided Student t tail.
inline double t_two_sided(double t, double df) {
  if (std::isinf(t)) return 0.0;
  return clamp01(boost::math::ibeta(df / 2.0, 0.5, df / (df + t * t)));
}

/// P(Bin(n, 1/2) <= k).
inline double binom_half_cdf(long long k, long long n) {
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  return boost::math::cdf(boost::math::binomial_distribution<>(static_cast<double>(n), 0.5),
                          static_cast<double>(k));
}

/// P(Beta(a, b) > x).
inline double beta_sf(double x, double a, double b) { return boost::math::ibetac(a, b, x); }

}  // namespace dist
}  // namespace optistat
