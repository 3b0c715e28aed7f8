#include "mmn/skewness.hpp"

#include <cmath>
#include <tuple>

#include "mmn/error.hpp"
#include "mmn/tensor.hpp"

namespace mmn {

namespace {

// Symmetric inverse square root of var(Y).
Mat inv_sqrt_sym(const Mat& s) {
  Eigen::SelfAdjointEigenSolver<Mat> es(s);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
    throw Error(ErrorKind::EigenFailure, "covariance eigendecomposition failed");
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

// Third moments of the standardized vector Z = Delta^{-1/2}(Y - mu), p^2 x p.
Mat standardized_m3(const MmnParams& p) {
  const MomentSet c = central_from_raw(moments_y(p));
  return transport_affine(c, inv_sqrt_sym(c.m2)).m3;
}

double canonical_variance(const MixingLaw& law, double ds) { return 1.0 + ds * ds * (law.variance() - 1.0); }

}  // namespace

double mardia(const MmnParams& p) {
  const double ds = canonical_form(p).delta_star;
  const double g1 = std::pow(ds, 3) * p.mixing.third_central() / std::pow(canonical_variance(p.mixing, ds), 1.5);
  return g1 * g1;
}

double mardia_mmne(const MmnParams& p) {
  if (p.mixing.kind() != MixingLaw::Kind::Exponential)
    throw Error(ErrorKind::UnsupportedLaw, "4 delta_*^6 holds for exponential mixing");
  return 4.0 * std::pow(canonical_form(p).delta_star, 6);
}

double srivastava(const MmnParams& p) {
  const MomentSet raw = moments_y(p);
  const Mat cov = raw.m2 - raw.m1 * raw.m1.transpose();
  Eigen::SelfAdjointEigenSolver<Mat> es(cov);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::EigenFailure, "var(Y) eigendecomposition failed");
  const auto n = p.dim();
  double acc = 0.0;
  // eigenvalues come ascending; walk them largest first
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    const double lam = es.eigenvalues()(i);
    if (lam <= 0.0) throw Error(ErrorKind::EigenFailure, "non-positive eigenvalue of var(Y)");
    const double c3 = third_central_linear(raw, es.eigenvectors().col(i))(0, 0);
    const double v = c3 / std::pow(lam, 1.5);
    acc += v * v;
  }
  return acc / static_cast<double>(n);
}

Vec mori(const MmnParams& p) {
  const Mat m3 = standardized_m3(p);
  const auto n = p.dim();
  Vec s = Vec::Zero(n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index i = 0; i < n; ++i) s(r) += m3(i * n + i, r);
  return s;
}

Vec kollo(const MmnParams& p) {
  const Mat m3 = standardized_m3(p);
  return m3.colwise().sum().transpose();
}

std::pair<Vec, double> bbq(const MmnParams& p) {
  const Mat m3 = standardized_m3(p);
  const auto n = p.dim();
  const double c = 3.0 / static_cast<double>(n * (n + 2));
  Vec t(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    double acc = m3(r * n + r, r);
    for (Eigen::Index i = 0; i < n; ++i)
      if (i != r) acc += m3(i * n + i, r);
    t(r) = c * acc;
  }
  return {t, t.squaredNorm()};
}

std::pair<double, Vec> isogai(const MmnParams& p) {
  const double ds = canonical_form(p).delta_star;
  if (ds == 0.0) return {0.0, Vec::Zero(p.dim())};
  const double m0 = canonical_mode(p.mixing, ds);
  const double eu = p.mixing.mean();
  const double gap = ds * eu - m0;
  return {gap * gap / canonical_variance(p.mixing, ds), (eu - m0 / ds) * p.delta};
}

SkewnessReport skewness_report(const MmnParams& p) {
  validate(p);
  SkewnessReport r;
  const double ds = canonical_form(p).delta_star;
  r.delta_star = ds;
  r.mardia = mardia(p);
  r.malkovich_afifi = r.mardia;
  r.srivastava = srivastava(p);
  r.mori = mori(p);
  r.kollo = kollo(p);
  std::tie(r.bbq_t, r.bbq_qstar) = bbq(p);
  r.mode_star = ds > 0.0 ? canonical_mode(p.mixing, ds) : 0.0;
  if (ds > 0.0) {
    const double eu = p.mixing.mean();
    const double gap = ds * eu - r.mode_star;
    r.isogai_si = gap * gap / canonical_variance(p.mixing, ds);
    r.isogai_sc = (eu - r.mode_star / ds) * p.delta;
  } else {
    r.isogai_sc = Vec::Zero(p.dim());
  }
  auto put = [&](const std::string& key, const Vec& v) {
    r.scalarized[key + "_sum"] = v.sum();
    r.scalarized[key + "_max"] = v.maxCoeff();
  };
  put("s", r.mori);
  put("b", r.kollo);
  put("T", r.bbq_t);
  put("sC", r.isogai_sc);
  return r;
}

SkewnessReport sample_report(const Mat& data, const MixingLaw& law, const FitConfig& cfg) {
  return skewness_report(fit(data, law, cfg).params);
}

std::string statistic_name(Statistic s) {
  switch (s) {
    case Statistic::Beta1p: return "beta1p";
    case Statistic::Beta2_1p: return "beta2_1p";
    case Statistic::SMax: return "s_max";
    case Statistic::SSum: return "s_sum";
    case Statistic::BMax: return "b_max";
    case Statistic::BSum: return "b_sum";
    case Statistic::QStar: return "q_star";
    case Statistic::TMax: return "T_max";
    case Statistic::TSum: return "T_sum";
    case Statistic::SI: return "s_I";
    case Statistic::SCMax: return "sC_max";
    case Statistic::SCSum: return "sC_sum";
  }
  return "?";
}

bool one_sided(Statistic s) {
  return s == Statistic::Beta1p || s == Statistic::Beta2_1p || s == Statistic::QStar || s == Statistic::SI;
}

double statistic_value(const SkewnessReport& r, Statistic s) {
  switch (s) {
    case Statistic::Beta1p: return r.mardia;
    case Statistic::Beta2_1p: return r.srivastava;
    case Statistic::SMax: return r.scalarized.at("s_max");
    case Statistic::SSum: return r.scalarized.at("s_sum");
    case Statistic::BMax: return r.scalarized.at("b_max");
    case Statistic::BSum: return r.scalarized.at("b_sum");
    case Statistic::QStar: return r.bbq_qstar;
    case Statistic::TMax: return r.scalarized.at("T_max");
    case Statistic::TSum: return r.scalarized.at("T_sum");
    case Statistic::SI: return r.isogai_si;
    case Statistic::SCMax: return r.scalarized.at("sC_max");
    case Statistic::SCSum: return r.scalarized.at("sC_sum");
  }
  return 0.0;
}

}  // namespace mmn
