#include "mmn/em.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "mmn/dist.hpp"
#include "mmn/error.hpp"
#include "mmn/quadrature.hpp"

namespace mmn {

namespace {

constexpr double kBoundary = 1.0 - 1e-6;
constexpr double kTinyDelta = 1e-6;

Vec marginal_skewness(const Mat& data) {
  const Vec mean = data.colwise().mean();
  const Mat c = data.rowwise() - mean.transpose();
  const Vec m2 = c.array().square().colwise().mean();
  const Vec m3 = c.array().cube().colwise().mean();
  return m3.array() / m2.array().pow(1.5);
}

void check_data(const Mat& data) {
  const auto n = data.rows(), p = data.cols();
  if (p < 1) throw Error(ErrorKind::DimensionMismatch, "data has no columns");
  if (n <= p + 2) throw Error(ErrorKind::DegenerateData, "insufficient observations");
  if (!data.allFinite()) throw Error(ErrorKind::DegenerateData, "non-finite observation");
}

// Radial shrink of delta into the admissible region; nudge an exact zero off the origin.
Vec guard_delta(Vec delta, const Mat& omega, const Vec& skew_dir) {
  if (delta.isZero(0.0)) {
    Vec dir = skew_dir.array().sign().matrix();
    if (dir.isZero(0.0)) dir = Vec::Unit(delta.size(), 0);
    delta = kTinyDelta * dir / dir.norm();
  }
  const Vec w = omega.diagonal().cwiseSqrt();
  const Mat obar = w.cwiseInverse().asDiagonal() * omega * w.cwiseInverse().asDiagonal();
  const double q = delta_quad(obar, delta);
  if (q >= kBoundary) delta *= std::sqrt(kBoundary / q) * (1.0 - 1e-12);
  const double mx = delta.cwiseAbs().maxCoeff();
  if (mx >= kBoundary) delta *= kBoundary / mx;
  return delta;
}

}  // namespace

EStepResult e_step(const MmnParams& p, const Mat& data) {
  const DensityWorkspace ws(p);
  if (ws.symmetric()) throw Error(ErrorKind::DegenerateSkewness, "E-step needs delta != 0");
  if (p.mixing.kind() == MixingLaw::Kind::TruncNormal)
    throw Error(ErrorKind::UnsupportedLaw, "fitting supports exponential and gamma mixing");
  EStepResult r;
  r.e1.resize(data.rows());
  r.e2.resize(data.rows());
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    const Vec m = cond_u_moments_from(p.mixing, ws.eta(), ws.a_of(data.row(i).transpose()), 2);
    r.e1(i) = m(0);
    r.e2(i) = m(1);
  }
  return r;
}

MStepResult m_step(const Mat& data, const Vec& e1, const Vec& e2) {
  const auto n = static_cast<double>(data.rows());
  if (e1.size() != data.rows() || e2.size() != data.rows())
    throw Error(ErrorKind::DimensionMismatch, "weights and data rows disagree");
  const Vec ybar = data.colwise().mean();
  const double s1 = e1.sum(), s2 = e2.sum();
  const double denom = s2 - s1 * s1 / n;
  if (!(denom > 1e-14 * std::abs(s2)))
    throw Error(ErrorKind::DegenerateWeights, "sum E2 - (sum E1)^2 / n is not positive");
  MStepResult m;
  m.alpha = (data.transpose() * e1 - ybar * s1) / denom;
  m.xi = ybar - m.alpha * (s1 / n);
  const Mat r = data.rowwise() - m.xi.transpose();
  const Vec re1 = r.transpose() * e1;
  m.sigma_y = (r.transpose() * r) / n - (re1 * m.alpha.transpose() + m.alpha * re1.transpose()) / n +
              m.alpha * m.alpha.transpose() * (s2 / n);
  m.sigma_y = 0.5 * (m.sigma_y + m.sigma_y.transpose());
  return m;
}

MmnParams params_from_mstep(const MStepResult& m, const MixingLaw& law) {
  MmnParams p;
  p.mixing = law;
  p.xi = m.xi;
  p.omega = m.sigma_y + m.alpha * m.alpha.transpose();
  const Vec w = p.omega.diagonal().cwiseSqrt();
  p.delta = guard_delta(m.alpha.cwiseQuotient(w), p.omega, m.alpha);
  return p;
}

MmnParams moment_init(const Mat& data, const MixingLaw& law) {
  check_data(data);
  const auto n = static_cast<double>(data.rows());
  const Vec mean = data.colwise().mean();
  const Mat c = data.rowwise() - mean.transpose();
  MmnParams p;
  p.mixing = law;
  p.omega = (c.transpose() * c) / n;
  if (!is_spd(p.omega)) throw Error(ErrorKind::DegenerateData, "sample covariance is singular");
  const Vec skew = marginal_skewness(data);
  p.delta.resize(skew.size());
  for (Eigen::Index j = 0; j < skew.size(); ++j) {
    const double s = skew(j);
    const double mag = std::min(0.3, std::cbrt(std::abs(s)));
    p.delta(j) = std::clamp((s >= 0 ? 1.0 : -1.0) * mag, -0.9, 0.9);
  }
  p.delta = guard_delta(p.delta, p.omega, skew);
  const Vec w = p.omega.diagonal().cwiseSqrt();
  p.xi = mean - law.mean() * w.cwiseProduct(p.delta);
  return p;
}

int free_parameter_count(int p, bool with_shape) { return p + p * (p + 1) / 2 + p + (with_shape ? 1 : 0); }

std::pair<double, double> information_criteria(double loglik, int k, std::size_t n) {
  return {2.0 * k - 2.0 * loglik, k * std::log(static_cast<double>(n)) - 2.0 * loglik};
}

namespace {

struct State {
  MmnParams params;
  double ll = 0.0;
};

// One ECM cycle: E-step, closed-form M-step, then (gamma with free shape) a Newton step in log nu.
State ecm_step(const State& cur, const Mat& data, const Vec& skew, const FitConfig& cfg, bool shape) {
  const EStepResult e = e_step(cur.params, data);
  State next{params_from_mstep(m_step(data, e.e1, e.e2), cur.params.mixing), 0.0};
  if (next.params.delta.isZero(0.0)) next.params.delta = guard_delta(next.params.delta, next.params.omega, skew);
  try {
    validate(next.params);
  } catch (const Error& err) {
    throw Error(ErrorKind::DegenerateData, std::string("M-step left the parameter space: ") + err.what());
  }
  next.ll = loglik(next.params, data);
  if (!shape) return next;

  // kept only if it helps, so the cycle stays monotone
  auto ll_nu = [&](double lognu) {
    MmnParams q = next.params;
    q.mixing = MixingLaw::gamma(std::exp(lognu));
    return loglik(q, data);
  };
  const double lo = std::log(cfg.nu_lo), hi = std::log(cfg.nu_hi), now = std::log(next.params.mixing.nu());
  const double h = 1e-3;
  const double lp = ll_nu(std::min(hi, now + h)), lm = ll_nu(std::max(lo, now - h));
  const double g = (lp - lm) / (2.0 * h), curv = (lp - 2.0 * next.ll + lm) / (h * h);
  double step = curv < 0.0 ? -g / curv : std::copysign(0.5, g);
  step = std::clamp(step, -1.0, 1.0);
  for (int k = 0; k < 6 && std::abs(step) > 1e-12; ++k, step *= 0.5) {
    const double to = std::clamp(now + step, lo, hi);
    const double cand = ll_nu(to);
    if (cand > next.ll) {
      next.params.mixing = MixingLaw::gamma(std::exp(to));
      next.ll = cand;
      break;
    }
  }
  return next;
}

// Flat coordinates for extrapolation: xi, alpha, lower triangle of Sigma_Y, log nu.
Vec pack(const MmnParams& p) {
  const auto d = p.dim();
  const StdDecomp s = std_decompose(p);
  Vec v(2 * d + d * (d + 1) / 2 + 1);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < d; ++i) v(k++) = p.xi(i);
  for (Eigen::Index i = 0; i < d; ++i) v(k++) = s.alpha(i);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = j; i < d; ++i) v(k++) = s.sigma_y(i, j);
  v(k) = std::log(p.mixing.nu());
  return v;
}

MmnParams unpack(const Vec& v, Eigen::Index d) {
  MStepResult m;
  m.xi = v.head(d);
  m.alpha = v.segment(d, d);
  m.sigma_y = Mat(d, d);
  Eigen::Index k = 2 * d;
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = j; i < d; ++i) m.sigma_y(i, j) = m.sigma_y(j, i) = v(k++);
  if (!is_spd(m.sigma_y)) throw Error(ErrorKind::NotPositiveDefinite, "extrapolated Sigma_Y");
  MmnParams p = params_from_mstep(m, MixingLaw::gamma(std::exp(v(k))));
  validate(p);
  return p;
}

FitResult climb(const Mat& data, const FitConfig& cfg, const MmnParams& start, const Vec& skew, bool shape) {
  State cur{start, 0.0};
  validate(cur.params);
  cur.ll = loglik(cur.params, data);

  FitResult res;
  res.loglik_trace.push_back(cur.ll);
  auto advance = [&](State next) {
    const double rel = std::abs(next.ll / cur.ll - 1.0);
    cur = std::move(next);
    res.loglik_trace.push_back(cur.ll);
    ++res.iters;
    if (rel < cfg.tol) res.converged = true;
  };

  while (res.iters < cfg.max_iter && !res.converged) {
    if (!shape || cfg.max_iter - res.iters < 3) {
      advance(ecm_step(cur, data, skew, cfg, shape));
      continue;
    }
    // With a free shape the cycle crawls along the nu ridge; SQUAREM extrapolation
    // (Varadhan and Roland, 2008), accepted only when it does not lower the likelihood.
    const State s0 = cur;
    advance(ecm_step(cur, data, skew, cfg, shape));
    if (res.converged) break;
    const State s1 = cur;
    advance(ecm_step(cur, data, skew, cfg, shape));
    if (res.converged) break;
    const Vec t0 = pack(s0.params), t1 = pack(s1.params), t2 = pack(cur.params);
    const Vec r = t1 - t0, v = t2 - t1 - r;
    if (!(v.norm() > 0.0)) continue;
    double a = std::min(-1.0, -r.norm() / v.norm());
    for (int k = 0; k < 4 && a < -1.0; ++k, a = std::min(-1.0, 0.5 * (a - 1.0))) {
      try {
        const State jump{unpack(t0 - 2.0 * a * r + a * a * v, data.cols()), 0.0};
        const State polished = ecm_step(jump, data, skew, cfg, shape);
        if (polished.ll >= cur.ll) {
          advance(polished);
          break;
        }
      } catch (const Error&) {
        // outside the parameter space: pull the step back toward plain ECM
      }
    }
  }
  res.params = cur.params;
  res.loglik = cur.ll;
  res.n_params = free_parameter_count(static_cast<int>(data.cols()), shape);
  std::tie(res.aic, res.bic) = information_criteria(cur.ll, res.n_params, static_cast<std::size_t>(data.rows()));
  return res;
}

}  // namespace

FitResult fit(const Mat& data, const MixingLaw& law, const FitConfig& cfg) {
  check_data(data);
  if (!(cfg.tol > 0.0) || cfg.max_iter < 1) throw Error(ErrorKind::DomainError, "invalid fit configuration");
  if (law.kind() == MixingLaw::Kind::TruncNormal)
    throw Error(ErrorKind::UnsupportedLaw, "fitting supports exponential and gamma mixing");
  const bool shape = law.kind() == MixingLaw::Kind::Gamma && cfg.estimate_nu;
  const Vec skew = marginal_skewness(data);

  if (cfg.init) {
    MmnParams start = *cfg.init;
    if (start.dim() != data.cols()) throw Error(ErrorKind::DimensionMismatch, "initial values vs data");
    start.mixing = law.kind() == start.mixing.kind() ? start.mixing : law;
    start.delta = guard_delta(start.delta, start.omega, skew);
    return climb(data, cfg, start, skew, shape);
  }

  // The moment start takes delta's signs from marginal skewness. When a marginal is
  // barely skewed that sign is a coin toss and EM stays in the mirrored basin, so
  // refit with each such sign flipped and keep the best likelihood.
  const MmnParams base = moment_init(data, law);
  FitResult best = climb(data, cfg, base, skew, shape);
  if (!cfg.sign_restarts) return best;
  const double weak = 3.0 * std::sqrt(6.0 / static_cast<double>(data.rows()));
  const Vec w = base.omega.diagonal().cwiseSqrt();
  const Vec mean = data.colwise().mean();
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    if (std::abs(skew(j)) >= weak) continue;
    MmnParams start = base;
    start.delta(j) = -start.delta(j);
    start.delta = guard_delta(start.delta, start.omega, skew);
    start.xi = mean - law.mean() * w.cwiseProduct(start.delta);
    try {
      FitResult alt = climb(data, cfg, start, skew, shape);
      if (alt.loglik > best.loglik) best = std::move(alt);
    } catch (const Error&) {
      // a failed restart leaves the primary fit in place
    }
  }
  return best;
}

}  // namespace mmn
