#pragma once

#include <array>
#include <map>
#include <string>

#include "mmn/em.hpp"
#include "mmn/params.hpp"

namespace mmn {

struct SkewnessReport {
  double mardia = 0.0;
  double malkovich_afifi = 0.0;
  double srivastava = 0.0;
  Vec mori;
  Vec kollo;
  Vec bbq_t;
  double bbq_qstar = 0.0;
  double isogai_si = 0.0;
  Vec isogai_sc;
  std::map<std::string, double> scalarized;  // s_sum, s_max, b_sum, b_max, T_sum, T_max, sC_sum, sC_max
  double delta_star = 0.0;
  double mode_star = 0.0;  // mode of the canonical scalar component
};

// Squared canonical skewness from the mixing moments.
double mardia(const MmnParams& p);
// 4 delta_*^6, valid for exponential mixing.
double mardia_mmne(const MmnParams& p);
double srivastava(const MmnParams& p);
Vec mori(const MmnParams& p);
Vec kollo(const MmnParams& p);
std::pair<Vec, double> bbq(const MmnParams& p);
std::pair<double, Vec> isogai(const MmnParams& p);

SkewnessReport skewness_report(const MmnParams& p);
SkewnessReport sample_report(const Mat& data, const MixingLaw& law, const FitConfig& cfg = {});

// The twelve test statistics.
enum class Statistic { Beta1p, Beta2_1p, SMax, SSum, BMax, BSum, QStar, TMax, TSum, SI, SCMax, SCSum };
inline constexpr std::array<Statistic, 12> kAllStatistics = {
    Statistic::Beta1p, Statistic::Beta2_1p, Statistic::SMax, Statistic::SSum, Statistic::BMax, Statistic::BSum,
    Statistic::QStar,  Statistic::TMax,     Statistic::TSum, Statistic::SI,   Statistic::SCMax, Statistic::SCSum};

std::string statistic_name(Statistic s);
// Upper-tail test (the rest are two-sided).
bool one_sided(Statistic s);
double statistic_value(const SkewnessReport& r, Statistic s);

}  // namespace mmn
