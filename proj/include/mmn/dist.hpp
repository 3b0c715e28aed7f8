#pragma once

#include <complex>
#include <cstdint>

#include "mmn/params.hpp"
#include "mmn/quadrature.hpp"

namespace mmn {

// Cached quantities for repeated density evaluation at one parameter set.
class DensityWorkspace {
 public:
  explicit DensityWorkspace(const MmnParams& p);

  const MmnParams& params() const { return p_; }
  const StdDecomp& decomp() const { return d_; }
  double eta() const { return eta_; }
  bool symmetric() const { return eta_ == 0.0; }
  // A(y) = (alpha' Sigma_Y^{-1} (y - xi) - 1) / eta
  double a_of(const Vec& y) const;
  // log phi_p(y; xi + shift, Sigma_Y)
  double log_normal(const Vec& y) const;

  double log_pdf_closed(const Vec& y) const;
  double log_pdf_generic(const Vec& y, const QuadOptions& opt = {}) const;
  double log_pdf(const Vec& y) const;

 private:
  MmnParams p_;
  StdDecomp d_;
  Eigen::LLT<Mat> chol_;
  Vec sinv_alpha_;
  Vec la_;  // L^{-1} alpha, L the Cholesky factor of Sigma_Y
  double eta_ = 0.0;
  double log_det_half_ = 0.0;
};

double pdf_generic(const MmnParams& p, const Vec& y);
double pdf_closed(const MmnParams& p, const Vec& y);
double log_pdf(const MmnParams& p, const Vec& y);
double pdf(const MmnParams& p, const Vec& y);
// Row-wise log densities of an n x p data matrix.
Vec log_pdf_rows(const MmnParams& p, const Mat& data);
double loglik(const MmnParams& p, const Mat& data);

// log of the integral over t > 0 of t^(nu-1) exp(a t - t^2/2).
double log_gamma_kernel(double nu, double a);

double mgf_y(const MmnParams& p, const Vec& t);
std::complex<double> cf_y(const MmnParams& p, const Vec& t);

// n x p matrix of draws.
Mat sample(const MmnParams& p, Rng& rng, std::size_t n);

// E[U^k | Y = y], k = 1..k_max; exponential mixing only.
Vec cond_u_moments(const MmnParams& p, const Vec& y, int k_max);
// Same conditional moments from (eta, A), for the exponential or gamma law.
Vec cond_u_moments_from(const MixingLaw& law, double eta, double a, int k_max);
// E[U | Z = z] for Z = delta_star U + sqrt(1 - delta_star^2) W.
double canonical_cond_mean(const MixingLaw& law, double delta_star, double z);

double pdf_univariate_mmne(double z, double lambda);
double log_pdf_univariate_mmne(double z, double lambda);

struct LogConcavityReport {
  std::size_t checks = 0;
  std::size_t violations = 0;
  double worst_gap = 0.0;  // most negative midpoint excess seen
};
LogConcavityReport check_logconcavity(const MmnParams& p, std::size_t trials, std::uint64_t seed);

struct DivisibilityReport {
  std::size_t draws = 0;
  double max_abs_z = 0.0;  // largest standardized discrepancy over all compared quantities
  std::size_t compared = 0;
  bool passed = false;
};
DivisibilityReport check_infinite_divisibility(const MmnParams& p, int n_parts, std::size_t draws,
                                               std::uint64_t seed);

}  // namespace mmn
