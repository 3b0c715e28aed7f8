#include "mmn/mc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <optional>
#include <string>

#include "mmn/dist.hpp"
#include "mmn/error.hpp"

namespace mmn {

unsigned resolve_threads(unsigned requested) {
  if (const char* env = std::getenv("MMN_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  const unsigned k = std::min<std::size_t>(std::max(1u, threads), std::max<std::size_t>(n, 1));
  if (k <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < k; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

double quantile_type7(std::vector<double> v, double q) {
  if (v.empty()) throw Error(ErrorKind::DomainError, "quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

bool trace_monotone(const std::vector<double>& trace, double rel_slack) {
  for (std::size_t i = 1; i < trace.size(); ++i)
    if (trace[i] < trace[i - 1] - rel_slack * std::max(1.0, std::abs(trace[i - 1]))) return false;
  return true;
}

void validate(const McConfig& cfg) {
  if (cfg.replicates < 100) throw Error(ErrorKind::InvalidInput, "at least 100 replicates are required");
  if (cfg.dim < 2 || cfg.dim > 8) throw Error(ErrorKind::InvalidInput, "dimension must lie in 2..8");
  if (cfg.sample_size <= static_cast<std::size_t>(cfg.dim) + 2)
    throw Error(ErrorKind::InvalidInput, "sample size too small for the dimension");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw Error(ErrorKind::InvalidInput, "alpha must lie in (0,1)");
  if (cfg.statistics.empty()) throw Error(ErrorKind::InvalidInput, "no statistics selected");
}

namespace {

void check_failures(std::size_t failures, std::size_t total) {
  if (static_cast<double>(failures) > 0.01 * static_cast<double>(total))
    throw Error(ErrorKind::StudyUnstable,
                std::to_string(failures) + " of " + std::to_string(total) + " replicates failed to fit");
}

MmnParams standard_normal(int p) {
  MmnParams q;
  q.xi = Vec::Zero(p);
  q.omega = Mat::Identity(p, p);
  q.delta = Vec::Zero(p);
  return q;
}

struct Replicate {
  std::optional<std::vector<double>> stats;
  bool converged = false;
};

std::vector<Replicate> run_statistics(const MmnParams& law, const McConfig& cfg, std::uint64_t seed) {
  std::vector<Replicate> out(cfg.replicates);
  parallel_for(cfg.replicates, resolve_threads(cfg.threads), [&](std::size_t r) {
    Rng rng = substream(seed, r);
    const Mat data = sample(law, rng, cfg.sample_size);
    try {
      bool conv = false;
      std::vector<double> s = sample_statistics(data, cfg.statistics, cfg.fit, &conv);
      const bool finite = std::all_of(s.begin(), s.end(), [](double v) { return std::isfinite(v); });
      if (finite) out[r].stats = std::move(s);
      out[r].converged = conv;
    } catch (const Error&) {
    }
  });
  return out;
}

}  // namespace

std::vector<double> sample_statistics(const Mat& data, const std::vector<Statistic>& which, const FitConfig& cfg,
                                      bool* converged) {
  const FitResult f = fit(data, MixingLaw::exponential(), cfg);
  if (converged) *converged = f.converged;
  const SkewnessReport rep = skewness_report(f.params);
  std::vector<double> v;
  for (Statistic s : which) v.push_back(statistic_value(rep, s));
  return v;
}

BiasStudy bias_mse_study(const MmnParams& truth, const std::vector<std::size_t>& n_list, std::size_t replicates,
                         std::uint64_t seed, unsigned threads, const FitConfig& fit_cfg) {
  validate(truth);
  if (truth.mixing.kind() != MixingLaw::Kind::Exponential)
    throw Error(ErrorKind::UnsupportedLaw, "bias study targets exponential mixing");
  if (replicates < 1) throw Error(ErrorKind::InvalidInput, "no replicates requested");
  const auto p = truth.dim();
  std::vector<std::string> names;
  std::vector<double> tv;
  for (Eigen::Index j = 0; j < p; ++j) {
    names.push_back("xi" + std::to_string(j + 1));
    tv.push_back(truth.xi(j));
  }
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index k = j; k < p; ++k) {
      names.push_back("Omega" + std::to_string(j + 1) + std::to_string(k + 1));
      tv.push_back(truth.omega(j, k));
    }
  for (Eigen::Index j = 0; j < p; ++j) {
    names.push_back("delta" + std::to_string(j + 1));
    tv.push_back(truth.delta(j));
  }

  BiasStudy study;
  for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
    const std::size_t n = n_list[ni];
    struct Est {
      std::optional<std::vector<double>> theta;
      bool monotone = true, converged = false;
    };
    std::vector<Est> est(replicates);
    const std::uint64_t stream_seed = seed + 0x100000000ull * (ni + 1);
    parallel_for(replicates, resolve_threads(threads), [&](std::size_t r) {
      Rng rng = substream(stream_seed, r);
      const Mat data = sample(truth, rng, n);
      try {
        const FitResult f = fit(data, truth.mixing, fit_cfg);
        std::vector<double> th;
        for (Eigen::Index j = 0; j < p; ++j) th.push_back(f.params.xi(j));
        for (Eigen::Index j = 0; j < p; ++j)
          for (Eigen::Index k = j; k < p; ++k) th.push_back(f.params.omega(j, k));
        for (Eigen::Index j = 0; j < p; ++j) th.push_back(f.params.delta(j));
        est[r].theta = std::move(th);
        est[r].monotone = trace_monotone(f.loglik_trace);
        est[r].converged = f.converged;
      } catch (const Error&) {
      }
    });
    std::size_t failed = 0, nonmono = 0, noconv = 0;
    for (const auto& e : est) {
      if (!e.theta) ++failed;
      else {
        nonmono += e.monotone ? 0 : 1;
        noconv += e.converged ? 0 : 1;
      }
    }
    check_failures(failed, replicates);
    study.failures.push_back(failed);
    study.nonmonotone.push_back(nonmono);
    study.nonconverged.push_back(noconv);
    const double m = static_cast<double>(replicates - failed);
    for (std::size_t q = 0; q < names.size(); ++q) {
      double s = 0.0, ss = 0.0, se = 0.0;
      for (const auto& e : est) {
        if (!e.theta) continue;
        const double v = (*e.theta)[q];
        s += v;
        ss += v * v;
        se += (v - tv[q]) * (v - tv[q]);
      }
      BiasRow row;
      row.parameter = names[q];
      row.n = n;
      row.truth = tv[q];
      row.mean = s / m;
      row.sd = m > 1 ? std::sqrt(std::max(0.0, (ss - m * row.mean * row.mean) / (m - 1.0))) : 0.0;
      row.bias = row.mean - tv[q];
      row.mse = se / m;
      study.rows.push_back(row);
    }
  }
  return study;
}

const CriticalRow& CriticalTable::row(Statistic s) const {
  for (const auto& r : rows)
    if (r.stat == s) return r;
  throw Error(ErrorKind::InvalidInput, "statistic missing from critical table");
}

CriticalTable critical_values(const McConfig& cfg) {
  validate(cfg);
  const auto reps = run_statistics(standard_normal(cfg.dim), cfg, cfg.seed);
  CriticalTable t;
  t.n = cfg.sample_size;
  t.p = static_cast<std::size_t>(cfg.dim);
  t.replicates = cfg.replicates;
  t.seed = cfg.seed;
  for (const auto& r : reps) {
    if (!r.stats) ++t.failures;
    else if (!r.converged) ++t.nonconverged;
  }
  check_failures(t.failures, cfg.replicates);
  for (std::size_t k = 0; k < cfg.statistics.size(); ++k) {
    std::vector<double> v;
    for (const auto& r : reps)
      if (r.stats) v.push_back((*r.stats)[k]);
    CriticalRow row;
    row.stat = cfg.statistics[k];
    row.lower_025 = quantile_type7(v, 0.5 * cfg.alpha);
    row.upper_025 = quantile_type7(v, 1.0 - 0.5 * cfg.alpha);
    row.upper_05 = quantile_type7(v, 1.0 - cfg.alpha);
    t.rows.push_back(row);
  }
  return t;
}

PowerTable power_study(const MmnParams& alt, const CriticalTable& table, const McConfig& cfg) {
  validate(cfg);
  validate(alt);
  if (static_cast<std::size_t>(alt.dim()) != table.p || static_cast<int>(table.p) != cfg.dim)
    throw Error(ErrorKind::DimensionMismatch, "alternative, table and configuration disagree on p");
  MmnParams law = alt;
  law.mixing = MixingLaw::exponential();
  const auto reps = run_statistics(law, cfg, cfg.seed);
  PowerTable pt;
  pt.replicates = cfg.replicates;
  for (const auto& r : reps) {
    if (!r.stats) ++pt.failures;
    else if (!r.converged) ++pt.nonconverged;
  }
  check_failures(pt.failures, cfg.replicates);
  const double m = static_cast<double>(cfg.replicates - pt.failures);
  for (std::size_t k = 0; k < cfg.statistics.size(); ++k) {
    const Statistic s = cfg.statistics[k];
    const CriticalRow& cr = table.row(s);
    std::size_t rej = 0;
    for (const auto& r : reps) {
      if (!r.stats) continue;
      const double v = (*r.stats)[k];
      const bool reject = one_sided(s) ? v > cr.upper_05 : (v < cr.lower_025 || v > cr.upper_025);
      rej += reject ? 1 : 0;
    }
    pt.rows.push_back({s, static_cast<double>(rej) / m});
  }
  return pt;
}

}  // namespace mmn
