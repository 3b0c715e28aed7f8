#include "mmn/dist.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <vector>

#include "mmn/error.hpp"
#include "mmn/normal.hpp"
#include "mmn/tensor.hpp"

namespace mmn {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log of the integral over t > 0 of t^(nu-1) exp(-(t - a)^2 / 2). Equals log_gamma_kernel(nu, a) - a^2/2,
// but never forms a^2/2, so it stays accurate for large a.
double log_kernel_shifted(double nu, double a) {
  if (nu == 1.0) {
    if (a >= -8.0) return kLogSqrt2Pi + norm_log_cdf(a);
    return std::log(upper_tail_ratio(-a)) - 0.5 * a * a;
  }
  if (a > 50.0) {
    // t = a + s; the part of the range with s < -38 carries less than e^-722 of the mass
    auto logg = [&](double sh) { return (nu - 1.0) * std::log(a + sh) - 0.5 * sh * sh; };
    return log_integrate_unimodal(logg, -38.0, 38.0, (nu - 1.0) / a, 1.0);
  }
  const double r = std::sqrt(a * a + 4.0 * nu);
  const double ts = a >= 0.0 ? 0.5 * (a + r) : 2.0 * nu / (r - a);
  const double xm = std::log(ts);
  const double w = 1.0 / std::sqrt(ts * ts + nu);
  if (a < 0.0) {
    if (!std::isfinite(a * a)) return -std::numeric_limits<double>::infinity();
    // pull out exp(-a^2/2) exactly; what is left is O(1) on the log scale
    auto logg = [&](double x) {
      const double t = std::exp(x);
      return nu * x + a * t - 0.5 * t * t;
    };
    return -0.5 * a * a + log_integrate_unimodal(logg, xm - 1e7, xm + 50.0, xm, w);
  }
  auto logg = [&](double x) {
    const double t = std::exp(x);
    return nu * x - 0.5 * (t - a) * (t - a);
  };
  return log_integrate_unimodal(logg, xm - 1e7, xm + 50.0, xm, w);
}

// log of the integral over u > 0 of u^k h(u) exp(b u - c2 u^2 / 2), on the log-u scale
double log_mixture_integral(const MixingLaw& law, double b, double c2, int k) {
  auto logg = [&](double x) {
    const double u = std::exp(x);
    return law.log_pdf_logu(x) + k * x + b * u - 0.5 * c2 * u * u;
  };
  const double hi = std::log(std::max(law.quantile(0.9999) + 12.0 * std::sqrt(law.variance()),
                                      std::max(0.0, b) / c2 + 40.0 / std::sqrt(c2)));
  const double xm = golden_argmax(logg, -745.0, hi);
  const double h = 1e-4;
  const double d2 = (logg(xm + h) - 2.0 * logg(xm) + logg(xm - h)) / (h * h);
  const double w = d2 < 0.0 ? 1.0 / std::sqrt(-d2) : 1.0;
  return log_integrate_unimodal(logg, xm - 1e4, hi, xm, w);
}

}  // namespace

DensityWorkspace::DensityWorkspace(const MmnParams& p) : p_(p), d_(std_decompose(p)) {
  chol_.compute(d_.sigma_y);
  if (chol_.info() != Eigen::Success) throw Error(ErrorKind::NotPositiveDefinite, "Sigma_Y");
  sinv_alpha_ = chol_.solve(d_.alpha);
  eta_ = std::sqrt(std::max(0.0, d_.alpha.dot(sinv_alpha_)));
  if (p.delta.isZero(0.0)) eta_ = 0.0;
  const Mat l = chol_.matrixL();
  log_det_half_ = l.diagonal().array().log().sum();
  la_ = l.triangularView<Eigen::Lower>().solve(d_.alpha);
}

double DensityWorkspace::a_of(const Vec& y) const {
  return (sinv_alpha_.dot(y - p_.xi) - 1.0) / eta_;
}

double DensityWorkspace::log_normal(const Vec& y) const {
  const Vec z = chol_.matrixL().solve(y - p_.xi);
  return -static_cast<double>(p_.dim()) * kLogSqrt2Pi - log_det_half_ - 0.5 * z.squaredNorm();
}

double DensityWorkspace::log_pdf_closed(const Vec& y) const {
  if (symmetric()) throw Error(ErrorKind::DegenerateSkewness, "closed form needs delta != 0");
  const MixingLaw& law = p_.mixing;
  double nu = 1.0;
  switch (law.kind()) {
    case MixingLaw::Kind::Exponential: break;
    case MixingLaw::Kind::Gamma: nu = law.nu(); break;
    case MixingLaw::Kind::TruncNormal:
      throw Error(ErrorKind::UnsupportedLaw, "no closed-form density for " + law.name());
  }
  // log phi(y) + A^2/2 regrouped so the two large quadratics never meet:
  // -|z_perp|^2/2 + (1/2 - s)/eta^2, with s = la'z and z_perp the part of z orthogonal to la.
  const Vec z = chol_.matrixL().solve(y - p_.xi);
  const double e2 = eta_ * eta_;
  const double s = la_.dot(z);
  const double perp = (z - (s / e2) * la_).squaredNorm();
  const double a = (s - 1.0) / eta_;
  const double c0 = -static_cast<double>(p_.dim()) * kLogSqrt2Pi - log_det_half_;
  return -nu * std::log(eta_) - boost::math::lgamma(nu) + c0 - 0.5 * perp + (0.5 - s) / e2 +
         log_kernel_shifted(nu, a);
}

double DensityWorkspace::log_pdf_generic(const Vec& y, const QuadOptions& opt) const {
  if (symmetric()) return log_normal(y);
  const Vec z = chol_.matrixL().solve(y - p_.xi);
  if (!z.allFinite()) return kNegInf;
  // |z - u la|^2 = |z_perp|^2 + (u eta - s/eta)^2 with s = la'z
  const double eta = la_.norm();
  const double s = la_.dot(z);
  const double c = -static_cast<double>(p_.dim()) * kLogSqrt2Pi - log_det_half_ -
                   0.5 * (z - (s / (eta * eta)) * la_).squaredNorm();
  const double m = s / eta;  // where the normal factor peaks, in units of u*eta
  const MixingLaw& law = p_.mixing;
  const double h = 1e-4;
  if (!std::isfinite(c)) return kNegInf;
  if (m < 0.0 && !std::isfinite(0.5 * m * m)) return kNegInf;
  if (m > 1e8) {
    // Beyond what quadrature on the u scale resolves; the posterior of u is then close to normal with
    // variance ~ 1/eta^2, so a Laplace step at its mode is accurate far below the size of the log density.
    auto logg = [&](double u) { return law.log_pdf(u) - 0.5 * (u * eta - m) * (u * eta - m); };
    const double um = golden_argmax(logg, 0.0, (m + 40.0) / eta, 1e-15);
    const double g = logg(um);
    if (!std::isfinite(g)) return kNegInf;
    return c + g + kLogSqrt2Pi - std::log(eta);
  }
  if (m > 50.0) {
    // far along the skew direction: the posterior of u is narrow and far out, integrate on the u scale
    auto logg = [&](double u) { return law.log_pdf(u) - 0.5 * (u * eta - m) * (u * eta - m); };
    const double hi = (m + 40.0) / eta;
    const double um = golden_argmax(logg, 0.0, hi, 1e-14);
    const double d2 = (logg(um + h / eta) - 2.0 * logg(um) + logg(um - h / eta)) / (h * h / (eta * eta));
    const double w = d2 < 0.0 ? 1.0 / std::sqrt(-d2) : 1.0 / eta;
    return c + log_integrate_unimodal(logg, 0.0, hi, um, w, opt);
  }
  // for m < 0 the factor exp(-m^2/2) comes out exactly
  const double shift = m < 0.0 ? -0.5 * m * m : 0.0;
  auto logg = [&](double x) {
    const double ue = std::exp(x) * eta;
    return law.log_pdf_logu(x) + (m < 0.0 ? ue * (m - 0.5 * ue) : -0.5 * (ue - m) * (ue - m));
  };
  const double hi = std::log(std::max(law.quantile(0.9999) + 12.0 * std::sqrt(law.variance()),
                                      (std::max(m, 0.0) + 40.0) / eta));
  const double xm = golden_argmax(logg, -745.0, hi);
  const double d2 = (logg(xm + h) - 2.0 * logg(xm) + logg(xm - h)) / (h * h);
  const double w = d2 < 0.0 ? 1.0 / std::sqrt(-d2) : 1.0;
  return c + shift + log_integrate_unimodal(logg, xm - 1e4, hi, xm, w, opt);
}

double DensityWorkspace::log_pdf(const Vec& y) const {
  if (symmetric()) return log_normal(y);
  if (p_.mixing.kind() == MixingLaw::Kind::TruncNormal) return log_pdf_generic(y);
  return log_pdf_closed(y);
}

double log_gamma_kernel(double nu, double a) { return 0.5 * a * a + log_kernel_shifted(nu, a); }

double pdf_generic(const MmnParams& p, const Vec& y) {
  return std::exp(DensityWorkspace(p).log_pdf_generic(y));
}
double pdf_closed(const MmnParams& p, const Vec& y) {
  return std::exp(DensityWorkspace(p).log_pdf_closed(y));
}
double log_pdf(const MmnParams& p, const Vec& y) { return DensityWorkspace(p).log_pdf(y); }
double pdf(const MmnParams& p, const Vec& y) { return std::exp(log_pdf(p, y)); }

Vec log_pdf_rows(const MmnParams& p, const Mat& data) {
  if (data.cols() != p.dim()) throw Error(ErrorKind::DimensionMismatch, "data columns vs dimension");
  const DensityWorkspace ws(p);
  Vec out(data.rows());
  for (Eigen::Index i = 0; i < data.rows(); ++i) out(i) = ws.log_pdf(data.row(i).transpose());
  return out;
}

double loglik(const MmnParams& p, const Mat& data) { return log_pdf_rows(p, data).sum(); }

double mgf_y(const MmnParams& p, const Vec& t) {
  const StdDecomp d = std_decompose(p);
  if (t.size() != p.dim()) throw Error(ErrorKind::DimensionMismatch, "t has the wrong length");
  return std::exp(t.dot(p.xi) + 0.5 * t.dot(d.sigma_y * t)) * p.mixing.mgf(t.dot(d.alpha));
}

std::complex<double> cf_y(const MmnParams& p, const Vec& t) {
  const StdDecomp d = std_decompose(p);
  if (t.size() != p.dim()) throw Error(ErrorKind::DimensionMismatch, "t has the wrong length");
  const std::complex<double> gauss(-0.5 * t.dot(d.sigma_y * t), t.dot(p.xi));
  return std::exp(gauss) * p.mixing.cf(t.dot(d.alpha));
}

Mat sample(const MmnParams& p, Rng& rng, std::size_t n) {
  const StdDecomp d = std_decompose(p);
  const auto dim = p.dim();
  const Mat sz = d.omega_bar - p.delta * p.delta.transpose();
  Eigen::LLT<Mat> llt(sz);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::NotPositiveDefinite, "Omega_bar - delta delta'");
  const Mat l = llt.matrixL();
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat out(static_cast<Eigen::Index>(n), dim);
  Vec w(dim);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    const double u = p.mixing.sample(rng);
    for (Eigen::Index j = 0; j < dim; ++j) w(j) = gauss(rng);
    const Vec x = u * p.delta + l * w;
    out.row(i) = (p.xi + d.omega_diag.cwiseProduct(x)).transpose();
  }
  return out;
}

Vec cond_u_moments_from(const MixingLaw& law, double eta, double a, int k_max) {
  if (k_max < 1) throw Error(ErrorKind::UnsupportedOrder, "k_max must be at least 1");
  if (!(eta > 0.0)) throw Error(ErrorKind::DegenerateSkewness, "eta = 0");
  Vec m(k_max);
  const bool expo = law.kind() == MixingLaw::Kind::Exponential ||
                    (law.kind() == MixingLaw::Kind::Gamma && law.nu() == 1.0);
  if (expo && a < -3.0) {
    // forward recurrence cancels when a << 0; ratios J_k/J_{k-1} are the minimal
    // solution of r_{k+1} = a + k/r_k, so run it backward from a far seed.
    // Depth: seed error decays roughly like exp(-2|a|sqrt(k)); checked to full precision.
    const int top = k_max + 16 + static_cast<int>(std::ceil(400.0 / (a * a)));
    double r = 0.5 * (a + std::sqrt(a * a + 4.0 * top));
    std::vector<double> ratio(static_cast<std::size_t>(k_max) + 1, 0.0);
    for (int k = top; k >= 1; --k) {
      r = k / (r - a);
      if (k <= k_max) ratio[static_cast<std::size_t>(k)] = r;
    }
    double acc = 1.0;
    for (int k = 1; k <= k_max; ++k) {
      acc *= ratio[static_cast<std::size_t>(k)] / eta;
      m(k - 1) = acc;
    }
    return m;
  }
  if (expo) {
    double prev2 = 1.0, prev1 = trunc_mean_excess(a) / eta;
    m(0) = prev1;
    for (int k = 2; k <= k_max; ++k) {
      const double cur = (a / eta) * prev1 + (k - 1) / (eta * eta) * prev2;
      m(k - 1) = cur;
      prev2 = prev1;
      prev1 = cur;
    }
    return m;
  }
  if (law.kind() == MixingLaw::Kind::Gamma) {
    const double base = log_kernel_shifted(law.nu(), a);
    for (int k = 1; k <= k_max; ++k)
      m(k - 1) = std::exp(log_kernel_shifted(law.nu() + k, a) - base - k * std::log(eta));
    return m;
  }
  throw Error(ErrorKind::UnsupportedLaw, "conditional moments need exponential or gamma mixing");
}

Vec cond_u_moments(const MmnParams& p, const Vec& y, int k_max) {
  if (p.mixing.kind() != MixingLaw::Kind::Exponential)
    throw Error(ErrorKind::UnsupportedLaw, "conditional moments are closed-form for exponential mixing only");
  const DensityWorkspace ws(p);
  if (ws.symmetric()) throw Error(ErrorKind::DegenerateSkewness, "delta = 0");
  return cond_u_moments_from(p.mixing, ws.eta(), ws.a_of(y), k_max);
}

double canonical_cond_mean(const MixingLaw& law, double dstar, double z) {
  const double s2 = 1.0 - dstar * dstar;
  const double eta = dstar / std::sqrt(s2);
  if (law.kind() != MixingLaw::Kind::TruncNormal) {
    const double a = (dstar * z / s2 - 1.0) / eta;
    return cond_u_moments_from(law, eta, a, 1)(0);
  }
  const double b = dstar * z / s2;
  return std::exp(log_mixture_integral(law, b, eta * eta, 1) - log_mixture_integral(law, b, eta * eta, 0));
}

double log_pdf_univariate_mmne(double z, double lambda) {
  if (lambda == 0.0) throw Error(ErrorKind::DegenerateSkewness, "lambda = 0");
  const double r = std::sqrt(1.0 + lambda * lambda);
  const double al = std::abs(lambda);
  return std::log(r / al) - r * z / lambda + 0.5 / (lambda * lambda) + norm_log_cdf((lambda * r * z - 1.0) / al);
}

double pdf_univariate_mmne(double z, double lambda) { return std::exp(log_pdf_univariate_mmne(z, lambda)); }

LogConcavityReport check_logconcavity(const MmnParams& p, std::size_t trials, std::uint64_t seed) {
  const DensityWorkspace ws(p);
  Rng rng = substream(seed, 0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Mat l = p.omega.llt().matrixL();
  const auto dim = p.dim();
  auto draw = [&] {
    Vec w(dim);
    for (Eigen::Index j = 0; j < dim; ++j) w(j) = 3.0 * gauss(rng);
    return Vec(p.xi + l * w);
  };
  LogConcavityReport rep;
  for (std::size_t t = 0; t < trials; ++t) {
    const Vec ya = draw(), yb = draw();
    const double la = ws.log_pdf(ya), lb = ws.log_pdf(yb);
    for (double s : {0.25, 0.5, 0.75}) {
      const double gap = ws.log_pdf(s * ya + (1.0 - s) * yb) - (s * la + (1.0 - s) * lb);
      ++rep.checks;
      rep.worst_gap = std::min(rep.worst_gap, gap);
      if (gap < -1e-9) ++rep.violations;
    }
  }
  return rep;
}

DivisibilityReport check_infinite_divisibility(const MmnParams& p, int n_parts, std::size_t draws,
                                               std::uint64_t seed) {
  if (p.mixing.kind() == MixingLaw::Kind::TruncNormal)
    throw Error(ErrorKind::UnsupportedLaw, "divisibility harness needs gamma mixing");
  if (n_parts < 1) throw Error(ErrorKind::DomainError, "n_parts must be positive");
  const StdDecomp d = std_decompose(p);
  const auto dim = p.dim();
  // component law: xi/n + omega (delta U_i + Z_i), U_i ~ Gamma(nu/n), Z_i ~ N(0, Sigma_X / n)
  const MixingLaw part = MixingLaw::gamma(p.mixing.nu() / n_parts);
  const Mat sz = d.omega_bar - p.delta * p.delta.transpose();
  const Mat l = Eigen::LLT<Mat>(sz / n_parts).matrixL();
  Rng rng = substream(seed, 0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const MomentSet mom = moments_y(p);
  std::vector<Vec> tgrid;
  for (Eigen::Index j = 0; j < dim; ++j)
    for (double s : {-0.1, 0.1}) {
      Vec t = Vec::Zero(dim);
      t(j) = s / d.omega_diag(j);
      tgrid.push_back(t);
    }
  const std::size_t nq = 3 * dim + tgrid.size();
  std::vector<double> sum(nq, 0.0), sumsq(nq, 0.0), target(nq, 0.0);
  for (Eigen::Index j = 0; j < dim; ++j) {
    target[3 * j] = mom.m1(j);
    target[3 * j + 1] = mom.m2(j, j);
    target[3 * j + 2] = mom.m3(j * dim + j, j);
  }
  for (std::size_t g = 0; g < tgrid.size(); ++g) target[3 * dim + g] = mgf_y(p, tgrid[g]);

  Vec w(dim);
  for (std::size_t r = 0; r < draws; ++r) {
    Vec y = p.xi;
    for (int k = 0; k < n_parts; ++k) {
      const double u = part.sample(rng);
      for (Eigen::Index j = 0; j < dim; ++j) w(j) = gauss(rng);
      y += d.omega_diag.cwiseProduct(u * p.delta + l * w);
    }
    for (Eigen::Index j = 0; j < dim; ++j) {
      const double v = y(j);
      const double q[3] = {v, v * v, v * v * v};
      for (int m = 0; m < 3; ++m) {
        sum[3 * j + m] += q[m];
        sumsq[3 * j + m] += q[m] * q[m];
      }
    }
    for (std::size_t g = 0; g < tgrid.size(); ++g) {
      const double e = std::exp(tgrid[g].dot(y));
      sum[3 * dim + g] += e;
      sumsq[3 * dim + g] += e * e;
    }
  }
  DivisibilityReport rep;
  rep.draws = draws;
  rep.compared = nq;
  const double n = static_cast<double>(draws);
  for (std::size_t q = 0; q < nq; ++q) {
    const double mean = sum[q] / n;
    const double var = std::max(sumsq[q] / n - mean * mean, 1e-300);
    rep.max_abs_z = std::max(rep.max_abs_z, std::abs(mean - target[q]) / std::sqrt(var / n));
  }
  rep.passed = rep.max_abs_z < 4.0;
  return rep;
}

}  // namespace mmn
