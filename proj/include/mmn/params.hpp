#pragma once

#include <Eigen/Dense>

#include "mmn/mixing.hpp"

namespace mmn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct MmnParams {
  Vec xi;
  Mat omega;
  Vec delta;
  MixingLaw mixing = MixingLaw::exponential();

  Eigen::Index dim() const { return xi.size(); }
};

// Throws NotPositiveDefinite, SkewnessOutOfRange or DimensionMismatch.
void validate(const MmnParams& p);

// Cholesky-based SPD test with pivot tolerance 1e-12 * ||m||_inf.
bool is_spd(const Mat& m);

struct StdDecomp {
  Vec omega_diag;  // sqrt(diag(Omega))
  Mat omega_bar;   // correlation form
  Mat sigma_y;     // Omega - alpha alpha'
  Vec alpha;       // omega * delta
};

StdDecomp std_decompose(const MmnParams& p);

// delta' Omega_bar^{-1} delta
double delta_quad(const Mat& omega_bar, const Vec& delta);

Vec mean_y(const MmnParams& p);
Mat var_y(const MmnParams& p);

// Parameters of c + A'Y for a full-rank p x h matrix A.
MmnParams affine_transform(const MmnParams& p, const Mat& a, const Vec& c);
// Parameters of Y + W, W ~ N(mu, sigma) independent of Y.
MmnParams convolve_with_normal(const MmnParams& p, const Vec& mu, const Mat& sigma);

struct CanonicalInfo {
  Mat transform_a;  // Z* = A*(Y - xi) has identity scale, skewness on axis 1
  double delta_star = 0.0;
  Mat inverse_transform;
};

CanonicalInfo canonical_form(const MmnParams& p);

// Mode of delta_star * U + sqrt(1 - delta_star^2) * W, W standard normal.
double canonical_mode(const MixingLaw& law, double delta_star);

Vec mode(const MmnParams& p);

}  // namespace mmn
