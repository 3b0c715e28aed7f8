#include "mmn/params.hpp"

#include <cmath>
#include <string>

#include "mmn/dist.hpp"
#include "mmn/error.hpp"

namespace mmn {

bool is_spd(const Mat& m) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  if (!m.allFinite() || !m.isApprox(m.transpose(), 1e-10)) return false;
  Eigen::LLT<Mat> llt(m);
  if (llt.info() != Eigen::Success) return false;
  const double tol = 1e-12 * m.cwiseAbs().rowwise().sum().maxCoeff();
  const Mat l = llt.matrixL();
  return l.diagonal().array().square().minCoeff() > tol;
}

double delta_quad(const Mat& omega_bar, const Vec& delta) {
  return delta.dot(omega_bar.llt().solve(delta));
}

void validate(const MmnParams& p) {
  const auto n = p.xi.size();
  if (n == 0) throw Error(ErrorKind::DimensionMismatch, "empty location vector");
  if (p.omega.rows() != n || p.omega.cols() != n || p.delta.size() != n)
    throw Error(ErrorKind::DimensionMismatch, "xi, Omega and delta disagree in dimension");
  if (!p.xi.allFinite() || !p.delta.allFinite())
    throw Error(ErrorKind::DomainError, "non-finite parameter");
  if (!is_spd(p.omega)) throw Error(ErrorKind::NotPositiveDefinite, "Omega is not positive definite");
  if ((p.delta.array().abs() >= 1.0).any())
    throw Error(ErrorKind::SkewnessOutOfRange, "every |delta_i| must be below 1");
  const Vec w = p.omega.diagonal().cwiseSqrt();
  const Mat obar = w.cwiseInverse().asDiagonal() * p.omega * w.cwiseInverse().asDiagonal();
  const double q = delta_quad(obar, p.delta);
  if (!(q < 1.0))
    throw Error(ErrorKind::SkewnessOutOfRange, "delta' Omega_bar^-1 delta = " + std::to_string(q) + " >= 1");
  const Vec alpha = w.cwiseProduct(p.delta);
  if (!is_spd(p.omega - alpha * alpha.transpose()))
    throw Error(ErrorKind::NotPositiveDefinite, "Sigma_Y is not positive definite");
}

StdDecomp std_decompose(const MmnParams& p) {
  validate(p);
  StdDecomp d;
  d.omega_diag = p.omega.diagonal().cwiseSqrt();
  const Vec winv = d.omega_diag.cwiseInverse();
  d.omega_bar = winv.asDiagonal() * p.omega * winv.asDiagonal();
  d.omega_bar = 0.5 * (d.omega_bar + d.omega_bar.transpose());
  d.omega_bar.diagonal().setOnes();
  d.alpha = d.omega_diag.cwiseProduct(p.delta);
  d.sigma_y = p.omega - d.alpha * d.alpha.transpose();
  return d;
}

Vec mean_y(const MmnParams& p) {
  const Vec alpha = p.omega.diagonal().cwiseSqrt().cwiseProduct(p.delta);
  return p.xi + p.mixing.mean() * alpha;
}

Mat var_y(const MmnParams& p) {
  const Vec alpha = p.omega.diagonal().cwiseSqrt().cwiseProduct(p.delta);
  return p.omega + (p.mixing.variance() - 1.0) * alpha * alpha.transpose();
}

MmnParams affine_transform(const MmnParams& p, const Mat& a, const Vec& c) {
  validate(p);
  if (a.rows() != p.dim() || c.size() != a.cols())
    throw Error(ErrorKind::DimensionMismatch, "A must be p x h and c of length h");
  if (a.cols() > a.rows() || Eigen::ColPivHouseholderQR<Mat>(a).rank() < a.cols())
    throw Error(ErrorKind::RankDeficient, "transformation matrix is not of full column rank");
  MmnParams t;
  t.mixing = p.mixing;
  t.xi = c + a.transpose() * p.xi;
  t.omega = a.transpose() * p.omega * a;
  t.omega = 0.5 * (t.omega + t.omega.transpose());
  const Vec w = p.omega.diagonal().cwiseSqrt();
  const Vec wt = t.omega.diagonal().cwiseSqrt();
  t.delta = (a.transpose() * w.cwiseProduct(p.delta)).cwiseQuotient(wt);
  validate(t);
  return t;
}

MmnParams convolve_with_normal(const MmnParams& p, const Vec& mu, const Mat& sigma) {
  validate(p);
  if (mu.size() != p.dim() || sigma.rows() != p.dim() || sigma.cols() != p.dim())
    throw Error(ErrorKind::DimensionMismatch, "normal component has the wrong dimension");
  if (!is_spd(sigma)) throw Error(ErrorKind::NotPositiveDefinite, "normal covariance is not positive definite");
  MmnParams t;
  t.mixing = p.mixing;
  t.xi = p.xi + mu;
  t.omega = p.omega + sigma;
  const Vec w = p.omega.diagonal().cwiseSqrt();
  t.delta = w.cwiseProduct(p.delta).cwiseQuotient(t.omega.diagonal().cwiseSqrt());
  validate(t);
  return t;
}

CanonicalInfo canonical_form(const MmnParams& p) {
  const StdDecomp d = std_decompose(p);
  const auto n = p.dim();
  const Mat c = d.omega_bar.llt().matrixU();  // Omega_bar = C'C
  const Vec winv = d.omega_diag.cwiseInverse();
  // C^{-T} delta is proportional to C Omega_bar^{-1} delta
  const Vec v = c.transpose().triangularView<Eigen::Lower>().solve(p.delta);
  const double dstar = v.norm();

  Mat pm = Mat::Identity(n, n);
  if (dstar > 0.0) {
    const Vec u = v / dstar;
    Vec w = u;
    w(0) -= 1.0;
    const double ww = w.squaredNorm();
    if (ww > 1e-30) pm -= 2.0 * w * w.transpose() / ww;
    pm.col(0) = u;
    for (Eigen::Index j = 1; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(pm(i, j)) > 1e-14) {
          if (pm(i, j) < 0.0) pm.col(j) *= -1.0;
          break;
        }
      }
    }
  }
  CanonicalInfo info;
  info.delta_star = dstar;
  const Mat cinv_t = c.transpose().triangularView<Eigen::Lower>().solve(Mat::Identity(n, n));
  info.transform_a = pm.transpose() * cinv_t * winv.asDiagonal();
  info.inverse_transform = d.omega_diag.asDiagonal() * c.transpose() * pm;
  return info;
}

double canonical_mode(const MixingLaw& law, double dstar) {
  if (!(dstar > 0.0)) return 0.0;
  if (!(dstar < 1.0)) throw Error(ErrorKind::SkewnessOutOfRange, "canonical skewness must be below 1");
  const double s2 = 1.0 - dstar * dstar;
  auto score = [&](double z) { return (dstar * canonical_cond_mean(law, dstar, z) - z) / s2; };

  double lo = 0.0, hi = dstar * law.mean() + 3.0;
  double flo = score(lo), fhi = score(hi);
  for (int k = 0; k < 60 && flo * fhi > 0.0; ++k) {
    if (flo < 0.0) {
      lo -= (hi - lo);
      flo = score(lo);
    } else {
      hi += (hi - lo);
      fhi = score(hi);
    }
  }
  if (flo * fhi > 0.0) throw Error(ErrorKind::RootNotBracketed, "no sign change in the canonical score");
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;

  // regula falsi, falling back to bisection whenever the bracket fails to halve
  bool bisect_next = false;
  for (int it = 0; it < 300 && hi - lo > 1e-10; ++it) {
    const double width = hi - lo;
    double x = bisect_next ? 0.5 * (lo + hi) : hi - fhi * (hi - lo) / (fhi - flo);
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    const double fx = score(x);
    if (fx == 0.0) return x;
    if ((fx > 0.0) == (flo > 0.0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
      fhi = fx;
    }
    bisect_next = hi - lo > 0.5 * width;
  }
  return 0.5 * (lo + hi);
}

Vec mode(const MmnParams& p) {
  validate(p);
  const CanonicalInfo ci = canonical_form(p);
  if (ci.delta_star == 0.0) return p.xi;
  const double m0 = canonical_mode(p.mixing, ci.delta_star);
  const Vec alpha = p.omega.diagonal().cwiseSqrt().cwiseProduct(p.delta);
  return p.xi + (m0 / ci.delta_star) * alpha;
}

}  // namespace mmn
