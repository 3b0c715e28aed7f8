#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "mmn/em.hpp"
#include "mmn/skewness.hpp"

namespace mmn {

// Worker count: MMN_THREADS wins over the request; 0 means hardware concurrency.
unsigned resolve_threads(unsigned requested);

// Runs body(i) for i in [0, n) on a pool; callers write results by index.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

// Linear interpolation between order statistics (type 7).
double quantile_type7(std::vector<double> v, double q);

bool trace_monotone(const std::vector<double>& trace, double rel_slack = 1e-10);

struct McConfig {
  std::size_t replicates = 1000;
  std::size_t sample_size = 100;
  int dim = 2;
  std::uint64_t seed = 20240601;
  double alpha = 0.05;
  unsigned threads = 0;
  std::vector<Statistic> statistics{kAllStatistics.begin(), kAllStatistics.end()};
  FitConfig fit;
};

void validate(const McConfig& cfg);

struct BiasRow {
  std::string parameter;
  std::size_t n = 0;
  double truth = 0.0, mean = 0.0, sd = 0.0, bias = 0.0, mse = 0.0;
};

struct BiasStudy {
  std::vector<BiasRow> rows;
  std::vector<std::size_t> failures;      // per entry of n_list
  std::vector<std::size_t> nonmonotone;   // replicates whose EM trace decreased
  std::vector<std::size_t> nonconverged;
};

BiasStudy bias_mse_study(const MmnParams& truth, const std::vector<std::size_t>& n_list, std::size_t replicates,
                         std::uint64_t seed, unsigned threads = 0, const FitConfig& fit_cfg = {});

struct CriticalRow {
  Statistic stat;
  double lower_025 = 0.0;  // 2.5% quantile
  double upper_025 = 0.0;  // 97.5% quantile
  double upper_05 = 0.0;   // 95% quantile
};

struct CriticalTable {
  std::vector<CriticalRow> rows;
  std::size_t n = 0, p = 0, replicates = 0;
  std::uint64_t seed = 0;
  std::size_t failures = 0;
  std::size_t nonconverged = 0;

  const CriticalRow& row(Statistic s) const;
};

// Sample statistics of one data set: MMNE fit then plug-in measures.
std::vector<double> sample_statistics(const Mat& data, const std::vector<Statistic>& which, const FitConfig& cfg,
                                      bool* converged = nullptr);

CriticalTable critical_values(const McConfig& cfg);

struct PowerRow {
  Statistic stat;
  double power = 0.0;
};

struct PowerTable {
  std::vector<PowerRow> rows;
  std::size_t replicates = 0;
  std::size_t failures = 0;
  std::size_t nonconverged = 0;
};

PowerTable power_study(const MmnParams& alt, const CriticalTable& table, const McConfig& cfg);

}  // namespace mmn
