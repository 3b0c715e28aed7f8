#include "mmn/mixing.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>

#include "mmn/error.hpp"
#include "mmn/normal.hpp"
#include "mmn/quadrature.hpp"

namespace mmn {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

Rng substream(std::uint64_t master_seed, std::uint64_t index) {
  std::seed_seq seq{splitmix64(master_seed), splitmix64(master_seed ^ splitmix64(index + 1))};
  return Rng(seq);
}

MixingLaw MixingLaw::gamma(double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw Error(ErrorKind::DomainError, "gamma shape must be positive");
  return MixingLaw(Kind::Gamma, nu, 0.0, 1.0);
}

MixingLaw MixingLaw::exponential() { return MixingLaw(Kind::Exponential, 1.0, 0.0, 1.0); }

MixingLaw MixingLaw::trunc_normal(double a, double b) {
  if (!(b > 0.0) || !std::isfinite(a)) throw Error(ErrorKind::DomainError, "truncated normal needs b > 0");
  return MixingLaw(Kind::TruncNormal, 1.0, a, b);
}

std::string MixingLaw::name() const {
  switch (kind_) {
    case Kind::Gamma: return "gamma";
    case Kind::Exponential: return "exponential";
    case Kind::TruncNormal: return "truncnormal";
  }
  return "?";
}

MixingLaw MixingLaw::with_nu(double nu) const {
  if (kind_ != Kind::Gamma) throw Error(ErrorKind::UnsupportedLaw, "only the gamma law has a shape");
  return gamma(nu);
}

double MixingLaw::log_pdf(double u) const {
  if (u < 0.0) return kNegInf;
  switch (kind_) {
    case Kind::Exponential: return -u;
    case Kind::Gamma:
      if (u == 0.0) return nu_ < 1.0 ? std::numeric_limits<double>::infinity() : (nu_ == 1.0 ? 0.0 : kNegInf);
      return (nu_ - 1.0) * std::log(u) - u - boost::math::lgamma(nu_);
    case Kind::TruncNormal: {
      const double sb = std::sqrt(b_);
      return norm_log_pdf((u - a_) / sb) - std::log(sb) - norm_log_cdf(a_ / sb);
    }
  }
  return kNegInf;
}

double MixingLaw::log_pdf_logu(double x) const {
  const double u = std::exp(x);
  switch (kind_) {
    case Kind::Exponential: return x - u;
    case Kind::Gamma: return nu_ * x - u - boost::math::lgamma(nu_);
    case Kind::TruncNormal: return x + log_pdf(u);
  }
  return kNegInf;
}

double MixingLaw::cdf(double u) const {
  if (u <= 0.0) return 0.0;
  switch (kind_) {
    case Kind::Exponential: return -std::expm1(-u);
    case Kind::Gamma: return boost::math::gamma_p(nu_, u);
    case Kind::TruncNormal: {
      const double sb = std::sqrt(b_), c = a_ / sb;
      // P(0 < X < u) / P(X > 0) written with upper tails to keep precision
      const double tail = norm_cdf(-(u - a_) / sb);
      return 1.0 - tail / norm_cdf(c);
    }
  }
  return 0.0;
}

double MixingLaw::quantile(double q) const {
  if (!(q >= 0.0 && q < 1.0)) throw Error(ErrorKind::DomainError, "quantile level outside [0,1)");
  switch (kind_) {
    case Kind::Exponential: return -std::log1p(-q);
    case Kind::Gamma: return q == 0.0 ? 0.0 : boost::math::gamma_p_inv(nu_, q);
    case Kind::TruncNormal: {
      const double sb = std::sqrt(b_), c = a_ / sb;
      const double upper = (1.0 - q) * norm_cdf(c);
      return std::max(0.0, a_ + sb * norm_upper_quantile(upper));
    }
  }
  return 0.0;
}

double MixingLaw::mgf(double t) const {
  switch (kind_) {
    case Kind::Exponential:
    case Kind::Gamma:
      if (t >= 1.0) throw Error(ErrorKind::DomainError, "mgf of the mixing law requires t < 1");
      return std::pow(1.0 - t, -nu_);
    case Kind::TruncNormal: {
      const double sb = std::sqrt(b_), c = a_ / sb;
      return std::exp(a_ * t + 0.5 * b_ * t * t + norm_log_cdf(c + sb * t) - norm_log_cdf(c));
    }
  }
  return 0.0;
}

std::complex<double> MixingLaw::cf(double s) const {
  using cd = std::complex<double>;
  if (kind_ != Kind::TruncNormal) return std::exp(-nu_ * std::log(cd(1.0, -s)));
  // E[exp(isU)] by panelled Gauss-Legendre over the bulk of the law
  const double hi = quantile(1.0 - 1e-15);
  const int panels = 64 + static_cast<int>(std::abs(s) * hi);
  double re = 0.0, im = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double lo_k = hi * k / panels, hi_k = hi * (k + 1) / panels;
    re += gl_integrate([&](double u) { return std::cos(s * u) * std::exp(log_pdf(u)); }, lo_k, hi_k, 20);
    im += gl_integrate([&](double u) { return std::sin(s * u) * std::exp(log_pdf(u)); }, lo_k, hi_k, 20);
  }
  return {re, im};
}

double MixingLaw::raw_moment(int k) const {
  if (k < 0 || k > 4) throw Error(ErrorKind::UnsupportedOrder, "raw moments available for k = 0..4");
  switch (kind_) {
    case Kind::Exponential:
    case Kind::Gamma: {
      double m = 1.0;
      for (int j = 0; j < k; ++j) m *= nu_ + j;
      return m;
    }
    case Kind::TruncNormal: {
      const double sb = std::sqrt(b_);
      double m[5];
      m[0] = 1.0;
      m[1] = a_ + sb * mills_ratio(a_ / sb);
      for (int j = 2; j <= k; ++j) m[j] = a_ * m[j - 1] + (j - 1) * b_ * m[j - 2];
      return m[k];
    }
  }
  return 0.0;
}

double MixingLaw::variance() const {
  const double m1 = raw_moment(1);
  return raw_moment(2) - m1 * m1;
}

double MixingLaw::third_central() const {
  const double m1 = raw_moment(1);
  return raw_moment(3) - 3.0 * m1 * raw_moment(2) + 2.0 * m1 * m1 * m1;
}

double MixingLaw::sample(Rng& rng) const {
  switch (kind_) {
    case Kind::Exponential: return std::exponential_distribution<double>(1.0)(rng);
    case Kind::Gamma: return std::gamma_distribution<double>(nu_, 1.0)(rng);
    case Kind::TruncNormal: {
      const double sb = std::sqrt(b_), c = a_ / sb;
      double v = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      if (v <= 0.0) v = std::numeric_limits<double>::min();
      return std::max(0.0, a_ + sb * norm_upper_quantile(v * norm_cdf(c)));
    }
  }
  return 0.0;
}

std::vector<double> MixingLaw::sample(Rng& rng, std::size_t n) const {
  std::vector<double> out(n);
  for (auto& u : out) u = sample(rng);
  return out;
}

}  // namespace mmn
