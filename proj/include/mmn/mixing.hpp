#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace mmn {

using Rng = std::mt19937_64;

// Per-replicate stream derived from a master seed by counter.
Rng substream(std::uint64_t master_seed, std::uint64_t index);

// Law of the mixing variable U >= 0.
class MixingLaw {
 public:
  enum class Kind { Gamma, Exponential, TruncNormal };

  static MixingLaw gamma(double nu);
  static MixingLaw exponential();
  // N(a, b) restricted to (0, inf); b is a variance.
  static MixingLaw trunc_normal(double a = 0.0, double b = 1.0);

  Kind kind() const { return kind_; }
  double nu() const { return nu_; }
  double a() const { return a_; }
  double b() const { return b_; }
  std::string name() const;
  bool has_shape() const { return kind_ == Kind::Gamma; }
  MixingLaw with_nu(double nu) const;

  double log_pdf(double u) const;
  // log(u h(u)) at u = exp(x); finite for very negative x where u underflows.
  double log_pdf_logu(double x) const;
  double cdf(double u) const;
  double quantile(double q) const;

  double mgf(double t) const;
  std::complex<double> cf(double s) const;
  double raw_moment(int k) const;
  double mean() const { return raw_moment(1); }
  double variance() const;
  double third_central() const;

  double sample(Rng& rng) const;
  std::vector<double> sample(Rng& rng, std::size_t n) const;

 private:
  MixingLaw(Kind k, double nu, double a, double b) : kind_(k), nu_(nu), a_(a), b_(b) {}
  Kind kind_;
  double nu_ = 1.0;
  double a_ = 0.0, b_ = 1.0;
};

}  // namespace mmn
