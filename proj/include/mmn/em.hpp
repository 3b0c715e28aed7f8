#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "mmn/params.hpp"

namespace mmn {

struct FitConfig {
  double tol = 1e-8;
  int max_iter = 2000;
  std::optional<MmnParams> init;  // empty: moment-based start
  double nu_lo = 0.05;
  double nu_hi = 50.0;
  bool estimate_nu = true;  // gamma mixing only
  bool sign_restarts = true;  // moment start only: retry weakly skewed coordinates with delta's sign flipped
};

struct FitResult {
  MmnParams params;
  double loglik = 0.0;
  std::vector<double> loglik_trace;  // includes the starting value
  int iters = 0;
  int n_params = 0;
  double aic = 0.0;
  double bic = 0.0;
  bool converged = false;
};

struct EStepResult {
  Vec e1;  // E[U | y_i]
  Vec e2;  // E[U^2 | y_i]
};

struct MStepResult {
  Vec xi;
  Vec alpha;
  Mat sigma_y;
};

// Conditional moments of U per row; exponential mixing uses the closed forms.
EStepResult e_step(const MmnParams& p, const Mat& data);
MStepResult m_step(const Mat& data, const Vec& e1, const Vec& e2);
// Omega = Sigma_Y + alpha alpha', delta = alpha / omega, with the boundary guard applied.
MmnParams params_from_mstep(const MStepResult& m, const MixingLaw& law);

MmnParams moment_init(const Mat& data, const MixingLaw& law);

FitResult fit(const Mat& data, const MixingLaw& law, const FitConfig& cfg = {});

int free_parameter_count(int p, bool with_shape);
std::pair<double, double> information_criteria(double loglik, int k, std::size_t n);

}  // namespace mmn
