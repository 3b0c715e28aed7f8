#include "mmn/tensor.hpp"

#include "mmn/error.hpp"

namespace mmn {

namespace {

Mat k3(const Mat& a, const Mat& b, const Mat& c) { return kron(kron(a, b), c); }

Mat col(const Vec& v) { return Mat(v); }
Mat row(const Vec& v) { return Mat(v.transpose()); }

void require_raw(const MomentSet& ms) {
  if (ms.central) throw Error(ErrorKind::FlagMismatch, "moment set is already central");
}

// Transport of X-moments to Y = xi + W X, W diagonal.
MomentSet transport_location_scale(const MomentSet& x, const Vec& xi, const Vec& wdiag) {
  const Mat w = wdiag.asDiagonal();
  const Mat w2 = kron(w, w);
  const Mat e = col(xi), et = row(xi);
  const Mat wm1 = col(w * x.m1);
  const Mat s2 = w * x.m2 * w;
  const Mat m3w = w2 * x.m3 * w;
  const Mat m3tw = w * x.m3.transpose() * w2;
  const Mat vs2 = col(vec(s2));
  const Mat ee = e * et;

  MomentSet y;
  y.m1 = xi + w * x.m1;
  y.m2 = ee + e * wm1.transpose() + wm1 * et + s2;
  y.m3 = kron(ee, e) + kron(ee, wm1) + kron(e * wm1.transpose(), e) + kron(wm1, ee) + kron(s2, e) +
         kron(e, s2) + kron(vs2, et) + m3w;
  y.m4 = kron(ee, ee) + kron(ee, e * wm1.transpose()) + kron(ee, wm1 * et) + kron(ee, s2) +
         kron(e * wm1.transpose(), ee) + kron(e, e) * vs2.transpose() + k3(e, s2, et) + kron(e, m3tw) +
         kron(wm1 * et, ee) + k3(et, s2, e) + k3(et, vs2, et) + kron(et, m3w) + kron(s2, ee) +
         kron(m3tw, e) + kron(m3w, et) + w2 * x.m4 * w2;
  return y;
}

}  // namespace

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Vec vec(const Mat& a) { return Eigen::Map<const Vec>(a.data(), a.size()); }

Mat commutation(int p) {
  if (p < 1 || p > 12) throw Error(ErrorKind::DimensionMismatch, "commutation matrix supported for 1 <= p <= 12");
  Mat u = Mat::Zero(p * p, p * p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) u(i * p + j, j * p + i) = 1.0;
  return u;
}

MomentSet moments_x(const Mat& omega_bar, const Vec& delta, const MixingLaw& law) {
  const auto p = delta.size();
  if (omega_bar.rows() != p || omega_bar.cols() != p)
    throw Error(ErrorKind::DimensionMismatch, "Omega_bar and delta disagree");
  if (!(delta_quad(omega_bar, delta) < 1.0))
    throw Error(ErrorKind::SkewnessOutOfRange, "delta' Omega_bar^-1 delta >= 1");
  const Mat s = omega_bar - delta * delta.transpose();
  const Mat d = col(delta), dt = row(delta);
  const Mat ip = Mat::Identity(p, p);
  const Mat vs = col(vec(s));
  const Mat id = kron(ip, d);
  const double e1 = law.raw_moment(1), e2 = law.raw_moment(2), e3 = law.raw_moment(3), e4 = law.raw_moment(4);

  MomentSet m;
  m.m1 = e1 * delta;
  m.m2 = s + e2 * d * dt;
  m.m3 = e1 * (kron(d, s) + vs * dt + id * s) + e3 * id * kron(d, dt);
  m.m4 = (Mat::Identity(p * p, p * p) + commutation(static_cast<int>(p))) * kron(s, s) + vs * vs.transpose() +
         e2 * (k3(d, dt, s) + k3(d, s, dt) + k3(s, d, dt) + k3(dt, s, d) + k3(dt, vs, dt) +
               kron(d, d) * vs.transpose()) +
         e4 * kron(d * dt, d * dt);
  return m;
}

MomentSet moments_y(const MmnParams& p) {
  const StdDecomp d = std_decompose(p);
  return transport_location_scale(moments_x(d.omega_bar, p.delta, p.mixing), p.xi, d.omega_diag);
}

MomentSet moments_y_mmne(const MmnParams& p) {
  if (p.mixing.kind() != MixingLaw::Kind::Exponential)
    throw Error(ErrorKind::UnsupportedLaw, "specialised moments are for exponential mixing");
  const StdDecomp dc = std_decompose(p);
  const auto n = p.dim();
  const Mat w = dc.omega_diag.asDiagonal();
  const Mat w2 = kron(w, w);
  const Mat ip = Mat::Identity(n, n);
  const Mat e = col(p.xi), et = row(p.xi);
  const Mat a = col(dc.alpha), at = row(dc.alpha);
  const Mat& sy = dc.sigma_y;
  const Mat g = sy + 2.0 * a * at;
  const Mat vg = col(vec(g));
  const Mat ee = e * et;

  const Mat sx = dc.omega_bar - p.delta * p.delta.transpose();
  const Mat d = col(p.delta), dt = row(p.delta), vsx = col(vec(sx));
  const Mat id = kron(ip, d);
  const Mat m3x = kron(d, sx) + vsx * dt + id * sx + 6.0 * id * kron(d, dt);
  const Mat m4x = (Mat::Identity(n * n, n * n) + commutation(static_cast<int>(n))) * kron(sx, sx) +
                  vsx * vsx.transpose() +
                  2.0 * (k3(d, dt, sx) + k3(d, sx, dt) + k3(sx, d, dt) + k3(dt, sx, d) + k3(dt, vsx, dt) +
                         kron(d, d) * vsx.transpose()) +
                  24.0 * kron(d * dt, d * dt);
  const Mat m3tw = w * m3x.transpose() * w2;
  const Mat m3w = w2 * m3x * w;

  MomentSet y;
  y.m1 = p.xi + dc.alpha;
  y.m2 = ee + e * at + a * et + g;
  y.m3 = kron(ee, e) + kron(ee, a) + kron(e * at, e) + kron(a, ee) + kron(g, e) + kron(e, g) + kron(vg, et) +
         kron(a, sy) + col(vec(sy)) * at + kron(ip, a) * (sy + 6.0 * a * at);
  y.m4 = kron(ee, ee) + kron(ee, e * at) + kron(ee, a * et) + kron(e * at, ee) + kron(ee, g) +
         kron(e, e) * vg.transpose() + k3(e, g, et) + kron(e, m3tw) + kron(a * et, ee) + k3(et, g, e) +
         k3(et, vg, et) + kron(et, m3w) + kron(g, ee) + kron(m3tw, e) + kron(m3w, et) + w2 * m4x * w2;
  return y;
}

MomentSet central_from_raw(const MomentSet& raw) {
  require_raw(raw);
  const Mat e = col(raw.m1), et = row(raw.m1);
  const Mat ee = e * et;
  const Mat& m2 = raw.m2;
  const Mat& m3 = raw.m3;
  const Mat vm2 = col(vec(m2));
  MomentSet c;
  c.central = true;
  c.m1 = Vec::Zero(raw.dim());
  c.m2 = m2 - ee;
  c.m3 = m3 - kron(m2, e) - kron(e, m2) - vm2 * et + 2.0 * kron(ee, e);
  c.m4 = raw.m4 - kron(m3.transpose(), e) - kron(m3, et) - kron(e, m3.transpose()) - kron(et, m3) + kron(m2, ee) +
         kron(e, e) * vm2.transpose() + k3(e, m2, et) + k3(et, m2, e) + k3(et, vm2, et) + kron(ee, m2) -
         3.0 * kron(ee, ee);
  return c;
}

MomentSet transport_affine(const MomentSet& ms, const Mat& a) {
  if (a.cols() != ms.dim()) throw Error(ErrorKind::DimensionMismatch, "A must have p columns");
  const Mat aa = kron(a, a);
  MomentSet out;
  out.central = ms.central;
  out.m1 = a * ms.m1;
  out.m2 = a * ms.m2 * a.transpose();
  out.m3 = aa * ms.m3 * a.transpose();
  out.m4 = aa * ms.m4 * aa.transpose();
  return out;
}

Mat third_central_linear(const MomentSet& raw, const Mat& a) {
  require_raw(raw);
  if (a.rows() != raw.dim()) throw Error(ErrorKind::DimensionMismatch, "A must have p rows");
  const Mat at = a.transpose();
  const Mat ae = at * col(raw.m1);
  const Mat am2a = at * raw.m2 * a;
  return kron(at, at) * raw.m3 * a - kron(am2a, ae) - kron(ae, am2a) - col(vec(am2a)) * row(raw.m1) * a +
         2.0 * kron(ae * ae.transpose(), ae);
}

}  // namespace mmn
