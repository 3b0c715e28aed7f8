#include "mmn/normal.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>

namespace mmn {

namespace {
constexpr double kTailSwitch = -8.0;
}

double norm_pdf(double x) { return std::exp(norm_log_pdf(x)); }

double norm_log_pdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

double norm_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double upper_tail_ratio(double t) {
  if (t < 8.0) return 0.5 * std::erfc(t * M_SQRT1_2) / norm_pdf(t);
  // Laplace continued fraction, evaluated bottom-up.
  double f = t;
  for (int k = 80; k >= 1; --k) f = t + k / f;
  return 1.0 / f;
}

double norm_log_cdf(double x) {
  if (x >= kTailSwitch) return std::log(norm_cdf(x));
  return norm_log_pdf(x) + std::log(upper_tail_ratio(-x));
}

double mills_ratio(double x) {
  if (x >= kTailSwitch) return norm_pdf(x) / norm_cdf(x);
  return 1.0 / upper_tail_ratio(-x);
}

double norm_quantile(double q) {
  static const boost::math::normal_distribution<double> n01;
  return boost::math::quantile(n01, q);
}

double norm_upper_quantile(double q) {
  static const boost::math::normal_distribution<double> n01;
  return boost::math::quantile(boost::math::complement(n01, q));
}

}  // namespace mmn

namespace mmn {

double trunc_mean_excess(double a) {
  if (a >= kTailSwitch) return a + mills_ratio(a);
  // 1/R(x) = x + 1/f2 in the continued fraction, so a + 1/R(-a) = 1/f2
  const double x = -a;
  double f = x;
  for (int k = 80; k >= 2; --k) f = x + k / f;
  return 1.0 / f;
}

}  // namespace mmn
