#include "mmn/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>

#include "mmn/error.hpp"

namespace mmn {

namespace {

GaussRule build_rule(int n) {
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    r.x[i] = -z;
    r.x[n - 1 - i] = z;
    r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
  return r;
}

struct Panel {
  double a, b, q;
  int depth;
};

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussRule>(build_rule(n));
  return *slot;
}

double gl_integrate(const std::function<double(double)>& f, double a, double b, int n) {
  const GaussRule& g = gauss_legendre(n);
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += g.w[i] * f(c + h * g.x[i]);
  return s * h;
}

double golden_argmax(const std::function<double(double)>& f, double lo, double hi, double xtol,
                     int max_iter) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > xtol * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? c : d;
}

double log_integrate_unimodal(const std::function<double(double)>& logf, double lo, double hi,
                              double xm, double width, const QuadOptions& opt) {
  if (!(hi > lo)) throw Error(ErrorKind::DomainError, "empty integration range");
  xm = std::clamp(xm, lo, hi);
  if (!(width > 0.0) || !std::isfinite(width)) width = 1.0;
  width = std::min(width, hi - lo);
  // The hint may be off. Unless it brackets the peak within half a width, polish it locally, and search
  // the whole range if the local maximum sits on the window edge.
  const double f0 = logf(xm);
  const bool bracketed = !(logf(std::max(lo, xm - 0.5 * width)) > f0) && !(logf(std::min(hi, xm + 0.5 * width)) > f0);
  if (!bracketed) {
    const double wl = std::max(lo, xm - 4.0 * width), wr = std::min(hi, xm + 4.0 * width);
    double x = golden_argmax(logf, wl, wr, 1e-6 * width, 200);
    const double edge = 0.01 * (wr - wl);
    if ((x - wl < edge && wl > lo) || (wr - x < edge && wr < hi)) x = golden_argmax(logf, lo, hi, 1e-6 * width, 400);
    if (logf(x) > f0) xm = x;
  }
  const double peak = logf(xm);
  if (!std::isfinite(peak)) throw Error(ErrorKind::QuadratureNotConverged, "non-finite integrand at peak");

  auto cut = [&](double dir) {
    double bound = dir < 0 ? lo : hi;
    double s = width;
    for (int k = 0; k < 200; ++k) {
      double x = xm + dir * s;
      if ((dir < 0 && x <= lo) || (dir > 0 && x >= hi)) return bound;
      if (logf(x) < peak - opt.tail_drop) return x;
      s *= 2.0;
    }
    return bound;
  };
  const double left = cut(-1.0), right = cut(1.0);

  std::vector<double> br{left};
  for (double x : {xm - 4.0 * width, xm, xm + 4.0 * width})
    if (x > br.back() && x < right) br.push_back(x);
  br.push_back(right);

  const GaussRule& g = gauss_legendre(opt.panel_nodes);
  auto panel = [&](double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < opt.panel_nodes; ++i) s += g.w[i] * std::exp(logf(c + h * g.x[i]) - peak);
    return s * h;
  };

  std::vector<Panel> stack;
  double total = 0.0;
  for (size_t i = 0; i + 1 < br.size(); ++i) {
    Panel p{br[i], br[i + 1], panel(br[i], br[i + 1]), 0};
    total += p.q;
    stack.push_back(p);
  }
  if (!(total > 0.0)) {
    throw Error(ErrorKind::QuadratureNotConverged, "integrand has no mass near the peak hint");
  }
  // exp(logf - peak) carries a relative error of about eps * |logf|; asking for more only splits noise
  const double tol = std::max(opt.rel_tol, 8.0 * std::numeric_limits<double>::epsilon() * std::abs(peak));
  double result = 0.0;
  while (!stack.empty()) {
    Panel p = stack.back();
    stack.pop_back();
    const double m = 0.5 * (p.a + p.b);
    const double q1 = panel(p.a, m), q2 = panel(m, p.b);
    if (std::abs(q1 + q2 - p.q) <= tol * total) {
      result += q1 + q2;
      continue;
    }
    if (p.depth >= opt.max_depth)
      throw Error(ErrorKind::QuadratureNotConverged, "panel refinement limit reached");
    stack.push_back({p.a, m, q1, p.depth + 1});
    stack.push_back({m, p.b, q2, p.depth + 1});
  }
  return peak + std::log(result);
}

}  // namespace mmn
