#pragma once

// Scalar standard-normal helpers with tail-safe variants.

namespace mmn {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double norm_pdf(double x);
double norm_log_pdf(double x);
double norm_cdf(double x);
// log Phi(x); stays finite far into the lower tail.
double norm_log_cdf(double x);
// phi(x)/Phi(x). For x < -8 the continued fraction of the upper-tail ratio is used.
double mills_ratio(double x);
// (1 - Phi(t)) / phi(t), t >= 0.
double upper_tail_ratio(double t);
double norm_quantile(double q);
// Quantile of the upper tail: returns x with 1 - Phi(x) = q.
double norm_upper_quantile(double q);

}  // namespace mmn

namespace mmn {
// a + phi(a)/Phi(a): mean of a + W given a + W > 0. Cancellation-free for a << 0.
double trunc_mean_excess(double a);
}  // namespace mmn
