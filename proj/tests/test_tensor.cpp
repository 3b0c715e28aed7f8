#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <random>

#include "doctest.h"
#include "mmn/dist.hpp"
#include "mmn/error.hpp"
#include "mmn/tensor.hpp"
#include "support.hpp"

using namespace mmn;
using doctest::Approx;

namespace {

double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

// Raw moments of Y by Isserlis' theorem given U = u, then integrated over the mixing density.
MomentSet isserlis_oracle(const MmnParams& p) {
  const auto n = p.dim();
  const Vec w = p.omega.diagonal().cwiseSqrt();
  const Vec a = w.cwiseProduct(p.delta);
  const Mat s = p.omega - a * a.transpose();
  boost::math::quadrature::exp_sinh<double> es;
  auto ex = [&](auto&& g) {
    return es.integrate([&](double u) {
      const double w = std::exp(p.mixing.log_pdf(u));
      return w == 0.0 ? 0.0 : g(u) * w;  // g grows polynomially; skip the far tail where w underflows
    });
  };
  MomentSet ms;
  ms.m1 = Vec(n);
  ms.m2 = Mat(n, n);
  ms.m3 = Mat(n * n, n);
  ms.m4 = Mat(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto m = [&](Eigen::Index k, double u) { return p.xi(k) + u * a(k); };
    ms.m1(i) = ex([&](double u) { return m(i, u); });
    for (Eigen::Index j = 0; j < n; ++j) {
      ms.m2(i, j) = ex([&](double u) { return m(i, u) * m(j, u) + s(i, j); });
      for (Eigen::Index k = 0; k < n; ++k) {
        ms.m3(i * n + k, j) = ex([&](double u) {
          return m(i, u) * m(j, u) * m(k, u) + m(i, u) * s(j, k) + m(j, u) * s(i, k) + m(k, u) * s(i, j);
        });
        for (Eigen::Index l = 0; l < n; ++l)
          ms.m4(i * n + k, j * n + l) = ex([&](double u) {
            const double mi = m(i, u), mj = m(j, u), mk = m(k, u), ml = m(l, u);
            return mi * mj * mk * ml + mi * mj * s(k, l) + mi * mk * s(j, l) + mi * ml * s(j, k) +
                   mj * mk * s(i, l) + mj * ml * s(i, k) + mk * ml * s(i, j) + s(i, j) * s(k, l) +
                   s(i, k) * s(j, l) + s(i, l) * s(j, k);
          });
      }
    }
  }
  return ms;
}

MmnParams uni(double d) {
  MmnParams p;
  p.xi = Vec::Zero(1);
  p.omega = Mat::Identity(1, 1);
  p.delta = Vec::Constant(1, d);
  return p;
}

}  // namespace

TEST_CASE("kron vec commutation") {
  CHECK(max_abs(kron(Mat::Identity(2, 2), Mat::Identity(2, 2)) - Mat::Identity(4, 4)) == 0.0);
  Mat a(2, 2);
  a << 1, 2, 3, 4;
  Vec expect(4);
  expect << 1, 2, 3, 4;  // vec of the transpose
  CHECK((commutation(2) * vec(a) - expect).norm() == 0.0);
  CHECK((vec(Mat::Ones(2, 2)) - Vec::Ones(4)).norm() == 0.0);
  Mat b(2, 3);
  b << 1, 2, 3, 4, 5, 6;
  const Mat k = kron(a, b);
  CHECK(k.rows() == 4);
  CHECK(k.cols() == 6);
  CHECK(k(3, 5) == 24.0);
  CHECK(k(1, 4) == 2 * 5.0);
  CHECK_THROWS_AS(commutation(13), Error);
  const Mat u = commutation(5);
  CHECK(max_abs(u * u - Mat::Identity(25, 25)) == 0.0);
}

TEST_CASE("moments of X") {
  const Mat obar = (Mat(2, 2) << 1, 0.3, 0.3, 1).finished();
  const auto g = moments_x(obar, Vec::Zero(2), MixingLaw::exponential());
  CHECK(g.m1.norm() == 0.0);
  CHECK(max_abs(g.m2 - obar) < 1e-15);
  CHECK(max_abs(g.m3) < 1e-15);
  const Mat m4 = (Mat::Identity(4, 4) + commutation(2)) * kron(obar, obar) + vec(obar) * vec(obar).transpose();
  CHECK(max_abs(g.m4 - m4) < 1e-14);

  const auto e = moments_x(Mat::Identity(1, 1), Vec::Constant(1, 0.5), MixingLaw::exponential());
  CHECK(e.m3(0, 0) == Approx(1.875).epsilon(1e-14));
  const Vec d = (Vec(2) << 0.4, -0.2).finished();
  const auto h = moments_x(obar, d, MixingLaw::gamma(2.7));
  CHECK((h.m1 - 2.7 * d).norm() < 1e-14);
}

TEST_CASE("moments of Y against the Isserlis oracle") {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 12; ++rep) {
    auto p = testing::random_params(rng, 1 + rep % 3);
    if (rep % 3 == 1) p.mixing = MixingLaw::gamma(0.5 + rep * 0.3);
    if (rep % 3 == 2) p.mixing = MixingLaw::trunc_normal(0.5, 1.5);
    CAPTURE(rep);
    const auto got = moments_y(p);
    const auto ref = isserlis_oracle(p);
    CHECK(max_abs(got.m1 - ref.m1) < 1e-10 * (1 + max_abs(ref.m1)));
    CHECK(max_abs(got.m2 - ref.m2) < 1e-10 * (1 + max_abs(ref.m2)));
    CHECK(max_abs(got.m3 - ref.m3) < 1e-10 * (1 + max_abs(ref.m3)));
    CHECK(max_abs(got.m4 - ref.m4) < 1e-10 * (1 + max_abs(ref.m4)));
  }
}

TEST_CASE("exponential closed forms agree with the generic path") {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 50; ++rep) {
    const auto p = testing::random_params(rng, 1 + rep % 5);
    const auto a = moments_y(p), b = moments_y_mmne(p);
    CHECK(max_abs(a.m1 - b.m1) <= 1e-10 * max_abs(b.m1) + 1e-12);
    CHECK(max_abs(a.m2 - b.m2) <= 1e-10 * max_abs(b.m2));
    CHECK(max_abs(a.m3 - b.m3) <= 1e-10 * max_abs(b.m3));
    CHECK(max_abs(a.m4 - b.m4) <= 1e-10 * max_abs(b.m4));
  }
}

TEST_CASE("mean and variance of Y") {
  const auto p = testing::sim_truth();
  const auto m = moments_y(p);
  CHECK(m.m1(0) == Approx(5 + std::sqrt(0.4) * 0.3));
  CHECK(m.m1(1) == Approx(10 + std::sqrt(0.6) * 0.7));
  CHECK(m.m1(2) == Approx(15 + 0.4));
  const auto c = central_from_raw(m);
  CHECK(max_abs(c.m2 - p.omega) < 1e-12);
  CHECK(max_abs(var_y(p) - p.omega) < 1e-15);
}

TEST_CASE("central moments") {
  MmnParams n = uni(0);
  const auto c = central_from_raw(moments_y(n));
  CHECK(std::abs(c.m3(0, 0)) < 1e-15);
  CHECK(c.m4(0, 0) == Approx(3.0));
  const auto e = central_from_raw(moments_y(uni(0.5)));
  CHECK(e.m3(0, 0) == Approx(0.25).epsilon(1e-13));
  CHECK(c.central);
  try {
    central_from_raw(c);
    FAIL("expected FlagMismatch");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::FlagMismatch);
  }
  // commutation symmetry of the central fourth moment
  std::mt19937_64 rng(2);
  const auto p = testing::random_params(rng, 3);
  const auto cc = central_from_raw(moments_y(p));
  const Mat u = commutation(3);
  CHECK(max_abs(u * cc.m4 * u - cc.m4) < 1e-12);
  CHECK(cc.m1.norm() == 0.0);
  CHECK(max_abs(cc.m2 - cc.m2.transpose()) == 0.0);
}

TEST_CASE("affine transport") {
  std::mt19937_64 rng(9);
  const auto p = testing::random_params(rng, 3);
  const auto raw = moments_y(p);
  const auto same = transport_affine(raw, Mat::Identity(3, 3));
  CHECK(max_abs(same.m4 - raw.m4) < 1e-12);
  CHECK(max_abs(same.m3 - raw.m3) < 1e-12);

  // standardization: central m2 of Omega^{-1/2} Y is the identity (var Y = Omega here)
  Eigen::SelfAdjointEigenSolver<Mat> es(p.omega);
  const Mat root_inv = es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  const auto z = central_from_raw(transport_affine(raw, root_inv));
  CHECK(max_abs(z.m2 - Mat::Identity(3, 3)) < 1e-12);

  // third central moment of A'Y, two routes
  const Mat id = Mat::Identity(3, 3);
  CHECK(max_abs(third_central_linear(raw, id) - central_from_raw(raw).m3) < 1e-10);
  Mat a(3, 2);
  a << 1, 0.5, -0.3, 2, 0.7, 0.1;
  const Mat via = central_from_raw(transport_affine(raw, a.transpose())).m3;
  CHECK(max_abs(third_central_linear(raw, a) - via) < 1e-10 * (1 + max_abs(via)));
  CHECK_THROWS_AS(transport_affine(raw, Mat::Identity(2, 2)), Error);
}

TEST_CASE("transport against Monte Carlo") {
  MmnParams p;
  p.xi = (Vec(2) << 0.5, -1).finished();
  p.omega = (Mat(2, 2) << 1.5, 0.4, 0.4, 1).finished();
  p.delta = (Vec(2) << 0.7, 0.2).finished();
  const Mat a = (Mat(2, 2) << 0.8, -0.6, 1.1, 0.3).finished();
  const auto t = transport_affine(moments_y(p), a.transpose());
  Rng rng(31);
  const std::size_t n = 1000000;
  const Mat y = sample(p, rng, n) * a;
  for (int i = 0; i < 2; ++i) {
    const Eigen::ArrayXd v = y.col(i).array();
    CHECK(std::abs(v.mean() - t.m1(i)) < 4 * std::sqrt((v - v.mean()).square().mean() / n));
    for (int j = 0; j < 2; ++j) {
      const Eigen::ArrayXd pr = v * y.col(j).array();
      CHECK(std::abs(pr.mean() - t.m2(i, j)) < 4 * std::sqrt((pr - pr.mean()).square().mean() / n));
      for (int k = 0; k < 2; ++k) {
        const Eigen::ArrayXd pr3 = pr * y.col(k).array();
        CHECK(std::abs(pr3.mean() - t.m3(i * 2 + k, j)) < 4 * std::sqrt((pr3 - pr3.mean()).square().mean() / n));
      }
    }
  }
}

TEST_CASE("mgf derivatives give the first two moments") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 6; ++rep) {
    auto p = testing::random_params(rng, 2, 0.8);
    if (rep % 2) p.mixing = MixingLaw::gamma(2);
    const auto m = moments_y(p);
    auto mg = [&](const Vec& t) { return mgf_y(p, t); };
    // central differences with one Richardson step
    auto d1 = [&](int i, double h) {
      Vec e = Vec::Zero(2);
      e(i) = h;
      return (mg(e) - mg(-e)) / (2 * h);
    };
    auto d2 = [&](int i, int j, double h) {
      Vec ei = Vec::Zero(2), ej = Vec::Zero(2);
      ei(i) = h;
      ej(j) = h;
      return (mg(ei + ej) - mg(ei - ej) - mg(ej - ei) + mg(-ei - ej)) / (4 * h * h);
    };
    const double h = 1e-3;
    for (int i = 0; i < 2; ++i) {
      const double r1 = (4 * d1(i, h / 2) - d1(i, h)) / 3;
      CHECK(r1 == Approx(m.m1(i)).epsilon(1e-5));
      for (int j = 0; j < 2; ++j) {
        const double r2 = (4 * d2(i, j, h / 2) - d2(i, j, h)) / 3;
        CHECK(r2 == Approx(m.m2(i, j)).epsilon(1e-5));
      }
    }
  }
}
