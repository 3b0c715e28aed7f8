#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mmn/params.hpp"

namespace mmn::testing {

inline std::string data_path(const std::string& file) { return std::string(MMN_DATA_DIR) + "/" + file; }

// Reference measure values for one parameter set (xi = 0, exponential mixing).
struct MeasureRow {
  int id;
  std::vector<double> omega;  // row-major
  std::vector<double> delta;
  double mardia, srivastava;
  std::vector<double> s, b;
  double qstar;
  std::vector<double> t;
  double si;
  std::vector<double> sc;
};

inline MmnParams row_params(const MeasureRow& r) {
  const auto p = static_cast<Eigen::Index>(r.delta.size());
  MmnParams q;
  q.xi = Vec::Zero(p);
  q.omega = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      r.omega.data(), p, p);
  q.delta = Eigen::Map<const Vec>(r.delta.data(), p);
  return q;
}

inline const std::vector<MeasureRow>& bivariate_rows() {
  static const std::vector<MeasureRow> rows = {
      {1, {1, 1, 1, 2.5}, {0.750, 0.985}, 3.966, 1.975, {0.825, 1.812}, {1.448, 3.179}, 0.558, {0.310, 0.680}, 0.788, {0.667, 0.876}},
      {2, {1, 0, 0, 2.5}, {0.200, 0.975}, 3.889, 1.718, {0.396, 1.932}, {0.552, 2.692}, 0.547, {0.149, 0.724}, 0.673, {0.165, 0.804}},
      {3, {1, 0, 0, 2.5}, {0.000, 0.995}, 3.881, 1.941, {0.000, 1.970}, {0.000, 1.970}, 0.546, {0.000, 0.739}, 0.666, {0.000, 0.816}},
      {4, {1, 1, 1, 2.5}, {0.650, 0.995}, 3.890, 1.774, {0.562, 1.890}, {0.870, 2.924}, 0.547, {0.211, 0.709}, 0.675, {0.536, 0.821}},
      {5, {1, 1, 1, 2.5}, {0.850, 0.900}, 3.337, 1.511, {1.099, 1.460}, {2.154, 2.862}, 0.469, {0.412, 0.547}, 0.412, {0.562, 0.595}},
      {6, {1, 0, 0, 2.5}, {0.550, -0.800}, 3.349, 0.580, {1.037, -1.508}, {0.069, -0.100}, 0.471, {0.389, -0.566}, 0.415, {0.365, -0.531}},
      {7, {1, 1, 1, 2.5}, {0.900, 0.775}, 2.731, 0.843, {1.254, 1.077}, {2.493, 2.141}, 0.384, {0.470, 0.404}, 0.286, {0.513, 0.442}},
      {8, {1, 0, 0, 2.5}, {0.800, 0.400}, 2.048, 0.532, {1.280, 0.640}, {2.304, 1.152}, 0.288, {0.480, 0.240}, 0.193, {0.393, 0.196}},
      {9, {1, 1, 1, 2.5}, {0.750, 0.150}, 1.607, 0.521, {1.263, -0.110}, {1.045, -0.091}, 0.226, {0.473, -0.041}, 0.1451, {0.333, 0.066}},
      {10, {1, 1, 1, 2.5}, {-0.750, -0.150}, 1.607, 0.521, {-1.263, 0.110}, {-1.045, 0.091}, 0.226, {-0.474, 0.041}, 0.145, {-0.333, -0.067}},
      {11, {1, 0, 0, 2.5}, {0.700, 0.000}, 0.471, 0.235, {0.686, 0.000}, {0.686, 0.000}, 0.066, {0.257, 0.000}, 0.043, {0.208, 0.000}},
      {12, {1, -1, -1, 2.5}, {0.000, 0.000}, 0.0, 0.0, {0.0, 0.0}, {0.0, 0.0}, 0.0, {0.0, 0.0}, 0.0, {0.0, 0.0}},
  };
  return rows;
}

inline const std::vector<MeasureRow>& trivariate_rows() {
  static const std::vector<MeasureRow> rows = {
      {1, {1, 0, 0, 0, 2.5, 0, 0, 0, 2.5}, {0.10, 0.70, 0.70}, 3.881, 0.314, {0.198, 1.386, 1.386}, {0.450, 3.150, 3.150}, 0.155, {0.040, 0.277, 0.277}, 0.666, {0.082, 0.574, 0.574}},
      {2, {1, 1, 1, 1, 2.5, 1, 1, 1, 10}, {0.75, 0.75, 0.65}, 2.712, 0.235, {0.752, 1.044, 1.028}, {2.211, 3.070, 3.023}, 0.108, {0.150, 0.209, 0.206}, 0.283, {0.426, 0.426, 0.369}},
      {3, {1, 0, 0, 0, 2.5, 0, 0, 0, 5}, {0.995, 0.00, 0.00}, 3.881, 1.294, {1.970, 0.000, 0.000}, {1.970, 0.000, 0.000}, 0.155, {0.394, 0.000, 0.000}, 0.666, {0.816, 0.000, 0.000}},
      {4, {1, 0, 0, 0, 1, 0, 0, 0, 2.5}, {0.40, -0.60, -0.60}, 2.726, 0.130, {0.704, -1.056, -1.056}, {0.512, -0.768, -0.768}, 0.109, {0.141, -0.211, -0.211}, 0.286, {0.228, -0.342, -0.342}},
      {5, {1, 1, 1, 1, 2.5, 1, 1, 1, 10}, {0.55, 0.05, -0.30}, 1.372, 0.223, {1.055, -0.140, -0.490}, {0.139, -0.018, -0.064}, 0.055, {0.211, -0.028, -0.098}, 0.122, {0.230, 0.021, -0.125}},
      {6, {1, 0, 0, 0, 2.5, 0, 0, 0, 1}, {0.75, 0.35, 0.35}, 2.106, 0.242, {1.211, 0.565, 0.565}, {3.154, 1.472, 1.472}, 0.084, {0.242, 0.113, 0.113}, 0.200, {0.373, 0.174, 0.174}},
  };
  return rows;
}

// Truth for the bias/recovery studies.
inline MmnParams sim_truth() {
  MmnParams q;
  q.xi = Vec(3);
  q.xi << 5, 10, 15;
  q.omega = Vec::Map(std::vector<double>{0.4, 0.6, 1.0}.data(), 3).asDiagonal();
  q.delta = Vec(3);
  q.delta << 0.3, 0.7, 0.4;
  return q;
}

// Random valid parameters: Omega from a random factor, delta scaled inside the admissible ellipsoid.
template <class Rng>
MmnParams random_params(Rng& rng, int p, double max_radius = 0.95) {
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> u01;
  MmnParams q;
  q.xi = Vec(p);
  for (int i = 0; i < p; ++i) q.xi(i) = 2.0 * n01(rng);
  Mat l(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) l(i, j) = n01(rng);
  q.omega = l * l.transpose() + 0.5 * Mat::Identity(p, p);
  const Vec w = q.omega.diagonal().cwiseSqrt();
  const Mat obar = w.cwiseInverse().asDiagonal() * q.omega * w.cwiseInverse().asDiagonal();
  Vec d(p);
  for (int i = 0; i < p; ++i) d(i) = n01(rng);
  const double r = std::sqrt(d.dot(obar.ldlt().solve(d)));
  q.delta = d * (max_radius * std::sqrt(u01(rng)) / r);
  // uniform shrink keeps delta inside the ellipsoid, unlike clipping single entries
  const double big = q.delta.cwiseAbs().maxCoeff();
  if (big >= 0.999) q.delta *= 0.99 / big;
  return q;
}

}  // namespace mmn::testing
