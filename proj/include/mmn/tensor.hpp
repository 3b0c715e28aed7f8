#pragma once

#include "mmn/params.hpp"

namespace mmn {

// First four tensor moments. m3 is p^2 x p and m4 is p^2 x p^2 in the Kronecker layout:
// m3((i*p + k), j) = E[X_i X_k X_j],  m4((i*p + k), (j*p + l)) = E[X_i X_j X_k X_l].
struct MomentSet {
  Vec m1;
  Mat m2;
  Mat m3;
  Mat m4;
  bool central = false;

  Eigen::Index dim() const { return m1.size(); }
};

Mat kron(const Mat& a, const Mat& b);
Vec vec(const Mat& a);
// U_{p,p}: vec(A) -> vec(A'). Dense, p <= 12.
Mat commutation(int p);

// Moments of X = delta U + Z, Z ~ N(0, Omega_bar - delta delta').
MomentSet moments_x(const Mat& omega_bar, const Vec& delta, const MixingLaw& law);
// Moments of Y = xi + omega X.
MomentSet moments_y(const MmnParams& p);
// The exponential-mixing expressions written out with E[U^m] = m!; for cross-checking.
MomentSet moments_y_mmne(const MmnParams& p);

MomentSet central_from_raw(const MomentSet& raw);
// Moments of A Y for an h x p matrix A.
MomentSet transport_affine(const MomentSet& ms, const Mat& a);
// Third central moment (h^2 x h) of A'Y from the raw moments of Y; A is p x h.
Mat third_central_linear(const MomentSet& raw, const Mat& a);

}  // namespace mmn
