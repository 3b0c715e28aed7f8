#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mmn/dist.hpp"
#include "mmn/em.hpp"
#include "mmn/error.hpp"
#include "mmn/io.hpp"
#include "mmn/mc.hpp"
#include "mmn/skewness.hpp"

namespace {

using namespace mmn;

constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidInput:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::NotPositiveDefinite:
    case ErrorKind::SkewnessOutOfRange:
    case ErrorKind::UnsupportedLaw:
    case ErrorKind::UnsupportedOrder:
    case ErrorKind::FlagMismatch:
      return kExitInput;
    default:
      return kExitNumeric;
  }
}

MixingLaw law_for(const std::string& model, double nu) {
  if (model == "mmne") return MixingLaw::exponential();
  if (model == "mmng") return MixingLaw::gamma(nu);
  throw InputError("unknown model '" + model + "' (expected mmne or mmng)");
}

std::vector<std::string> split_list(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const auto& r : raw) {
    std::stringstream ss(r);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

Dataset load_fit_data(const std::string& input, const std::vector<std::string>& columns) {
  Dataset d = read_csv(input, split_list(columns));
  if (d.values.rows() <= d.values.cols() + 2)
    throw InputError("insufficient observations: n=" + std::to_string(d.values.rows()) +
                     " but fitting needs n > p+2 with p=" + std::to_string(d.values.cols()));
  return d;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

void record(const std::string& out, const std::string& cmd, Json config, std::uint64_t seed,
            std::vector<std::string> outputs, const Timer& t) {
  if (out.empty() || out == "-") return;
  RunRecord r;
  r.command = cmd;
  r.config = std::move(config);
  r.seed = seed;
  r.outputs = std::move(outputs);
  r.wall_seconds = t.seconds();
  r.version = kArtifactVersion;
  write_run_record(out, r);
}

// Density on a regular grid spanning mean +- 4 sd per coordinate (p = 1 or 2).
std::string density_grid(const MmnParams& p, int size) {
  const auto dim = p.dim();
  if (dim > 2) throw InputError("--density-grid supports p = 1 or 2");
  if (size < 2) throw InputError("--grid-size must be at least 2");
  const Vec mu = mean_y(p);
  const Vec sd = var_y(p).diagonal().cwiseSqrt();
  DensityWorkspace ws(p);
  std::ostringstream os;
  auto axis = [&](Eigen::Index j, int k) { return mu(j) - 4.0 * sd(j) + 8.0 * sd(j) * k / (size - 1); };
  if (dim == 1) {
    os << "y1,density\n";
    for (int i = 0; i < size; ++i) {
      Vec y(1);
      y << axis(0, i);
      os << format_double(y(0)) << ',' << format_double(std::exp(ws.log_pdf(y))) << '\n';
    }
  } else {
    os << "y1,y2,density\n";
    for (int i = 0; i < size; ++i)
      for (int k = 0; k < size; ++k) {
        Vec y(2);
        y << axis(0, i), axis(1, k);
        os << format_double(y(0)) << ',' << format_double(y(1)) << ',' << format_double(std::exp(ws.log_pdf(y)))
           << '\n';
      }
  }
  return os.str();
}

struct McFlags {
  int dim = 2;
  std::size_t n = 100;
  std::size_t replicates = 1000;
  std::uint64_t seed = 20240601;
  double alpha = 0.05;
  unsigned threads = 0;
  bool full = false;
  std::vector<std::string> statistics;

  void add(CLI::App* c) {
    c->add_option("--n", n, "sample size per replicate")->capture_default_str();
    c->add_option("--replicates", replicates, "Monte Carlo replicates")->capture_default_str();
    c->add_option("--seed", seed, "master seed")->capture_default_str();
    c->add_option("--alpha", alpha, "significance level")->capture_default_str();
    c->add_option("--threads", threads, "worker threads (0: all cores; MMN_THREADS overrides)");
    c->add_flag("--full", full, "full-scale run, 10000 replicates");
    c->add_option("--statistics", statistics, "subset of statistic names (default all 12)")->delimiter(',');
  }

  McConfig config() const {
    McConfig c;
    c.dim = dim;
    c.sample_size = n;
    c.replicates = full ? 10000 : replicates;
    c.seed = seed;
    c.alpha = alpha;
    c.threads = threads;
    if (!statistics.empty()) {
      c.statistics.clear();
      for (const auto& s : statistics) c.statistics.push_back(statistic_from_name(s));
    }
    return c;
  }

  Json json(const McConfig& c) const {
    Json j;
    j["dim"] = c.dim;
    j["n"] = c.sample_size;
    j["replicates"] = c.replicates;
    j["seed"] = c.seed;
    j["alpha"] = c.alpha;
    Json s = Json::array();
    for (auto st : c.statistics) s.push_back(statistic_name(st));
    j["statistics"] = s;
    return j;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean mixtures of multivariate normals: fitting, sampling, skewness and tests"};
  app.require_subcommand(1);

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "maximum-likelihood fit by EM");
  std::string fit_input, fit_model = "mmne", fit_init, fit_out;
  std::vector<std::string> fit_columns;
  double fit_nu = 1.0;
  bool fit_fix_nu = false, fit_single_start = false;
  FitConfig fit_cfg;
  fit_cmd->add_option("--input", fit_input, "CSV with header row")->required();
  fit_cmd->add_option("--columns", fit_columns, "comma-separated column names (default all)");
  fit_cmd->add_option("--model", fit_model, "mmne or mmng")->capture_default_str();
  fit_cmd->add_option("--nu", fit_nu, "gamma shape (starting value for mmng)")->capture_default_str();
  fit_cmd->add_flag("--fix-nu", fit_fix_nu, "hold nu fixed");
  fit_cmd->add_flag("--single-start", fit_single_start, "skip the delta sign-flip restarts");
  fit_cmd->add_option("--tol", fit_cfg.tol, "relative log-likelihood tolerance")->capture_default_str();
  fit_cmd->add_option("--max-iter", fit_cfg.max_iter, "iteration cap")->capture_default_str();
  fit_cmd->add_option("--init", fit_init, "params JSON used as the starting point");
  fit_cmd->add_option("--out", fit_out, "output JSON (default stdout)");

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "draw a sample");
  std::string sample_params, sample_out, sample_model;
  std::size_t sample_n = 100;
  std::uint64_t sample_seed = 1;
  sample_cmd->add_option("--params", sample_params, "params JSON")->required();
  sample_cmd->add_option("--model", sample_model, "mmne or mmng; must agree with the params file");
  sample_cmd->add_option("--n", sample_n, "rows")->capture_default_str();
  sample_cmd->add_option("--seed", sample_seed, "seed")->capture_default_str();
  sample_cmd->add_option("--out", sample_out, "output CSV (default stdout)");

  // skewness
  auto* skew_cmd = app.add_subcommand("skewness", "skewness measures of params or of a fitted sample");
  std::string skew_params, skew_input, skew_model = "mmne", skew_out, skew_grid;
  std::vector<std::string> skew_columns;
  double skew_nu = 1.0;
  int grid_size = 101;
  auto* o_params = skew_cmd->add_option("--params", skew_params, "params JSON (population measures)");
  auto* o_input = skew_cmd->add_option("--input", skew_input, "CSV to fit first (sample measures)");
  o_params->excludes(o_input);
  skew_cmd->add_option("--columns", skew_columns, "columns of --input");
  skew_cmd->add_option("--model", skew_model, "model for --input")->capture_default_str();
  skew_cmd->add_option("--nu", skew_nu, "starting gamma shape for mmng");
  skew_cmd->add_option("--out", skew_out, "output JSON (default stdout)");
  skew_cmd->add_option("--density-grid", skew_grid, "also write a density grid CSV here");
  skew_cmd->add_option("--grid-size", grid_size, "grid points per axis")->capture_default_str();

  // critical-values
  auto* crit_cmd = app.add_subcommand("critical-values", "null critical values of the twelve statistics");
  McFlags crit_flags;
  std::string crit_out, crit_csv;
  crit_cmd->add_option("--dim", crit_flags.dim, "dimension p")->capture_default_str();
  crit_flags.add(crit_cmd);
  crit_cmd->add_option("--out", crit_out, "output JSON (default stdout)");
  crit_cmd->add_option("--csv", crit_csv, "also write CSV");

  // power
  auto* power_cmd = app.add_subcommand("power", "power of the twelve tests against an alternative");
  McFlags power_flags;
  std::string power_params, power_table, power_out, power_csv;
  power_cmd->add_option("--params", power_params, "alternative params JSON")->required();
  power_cmd->add_option("--table", power_table, "critical-values JSON (default: simulate it)");
  power_flags.add(power_cmd);
  power_cmd->add_option("--out", power_out, "output JSON (default stdout)");
  power_cmd->add_option("--csv", power_csv, "also write CSV");

  // bias
  auto* bias_cmd = app.add_subcommand("bias", "bias and MSE of the EM estimates");
  std::string bias_params, bias_out;
  std::vector<std::size_t> bias_n{50, 100, 1000};
  std::size_t bias_reps = 200;
  std::uint64_t bias_seed = 20240601;
  unsigned bias_threads = 0;
  bias_cmd->add_option("--params", bias_params, "true params JSON (mmne)")->required();
  bias_cmd->add_option("--n-list", bias_n, "sample sizes")->delimiter(',')->capture_default_str();
  bias_cmd->add_option("--replicates", bias_reps, "replicates per n")->capture_default_str();
  bias_cmd->add_option("--seed", bias_seed, "master seed")->capture_default_str();
  bias_cmd->add_option("--threads", bias_threads, "worker threads");
  bias_cmd->add_option("--out", bias_out, "output JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  }

  Json argv_json = Json::array();
  for (int i = 1; i < argc; ++i) argv_json.push_back(argv[i]);

  try {
    Timer timer;
    if (*fit_cmd) {
      const Dataset d = load_fit_data(fit_input, fit_columns);
      const MixingLaw law = law_for(fit_model, fit_nu);
      fit_cfg.estimate_nu = !fit_fix_nu;
      fit_cfg.sign_restarts = !fit_single_start;
      if (!fit_init.empty()) {
        MmnParams init = read_params(fit_init);
        init.mixing = law.has_shape() && init.mixing.has_shape() ? init.mixing : law;
        fit_cfg.init = init;
      }
      const FitResult f = fit(d.values, law, fit_cfg);
      Json j = fit_to_json(f, static_cast<std::size_t>(d.values.rows()));
      j["columns"] = d.columns;
      emit(fit_out, j.dump(2) + "\n");
      record(fit_out, "fit", Json{{"argv", argv_json}, {"input", fit_input}, {"columns", d.columns}}, 0,
             {fit_out}, timer);
      if (!f.converged) std::cerr << "warning: EM stopped at max-iter without meeting tol\n";
    } else if (*sample_cmd) {
      const MmnParams p = read_params(sample_params);
      if (!sample_model.empty()) {
        const std::string has = p.mixing.kind() == MixingLaw::Kind::Gamma ? "mmng" : "mmne";
        if (sample_model != has) throw InputError("--model " + sample_model + " disagrees with params model " + has);
      }
      Rng rng(sample_seed);
      const Mat y = sample(p, rng, sample_n);
      std::vector<std::string> header;
      for (Eigen::Index j = 0; j < p.dim(); ++j) header.push_back("y" + std::to_string(j + 1));
      std::ostringstream os;
      write_csv(os, header, y);
      emit(sample_out, os.str());
      record(sample_out, "sample", Json{{"argv", argv_json}, {"params", params_to_json(p)}, {"n", sample_n}},
             sample_seed, {sample_out}, timer);
    } else if (*skew_cmd) {
      if (skew_params.empty() == skew_input.empty()) throw InputError("give exactly one of --params or --input");
      MmnParams p;
      Json cfg{{"argv", argv_json}};
      if (!skew_params.empty()) {
        p = read_params(skew_params);
      } else {
        const Dataset d = load_fit_data(skew_input, skew_columns);
        p = fit(d.values, law_for(skew_model, skew_nu), FitConfig{}).params;
        cfg["fitted_params"] = params_to_json(p);
      }
      const SkewnessReport rep = skewness_report(p);
      emit(skew_out, report_to_json(rep).dump(2) + "\n");
      std::vector<std::string> outs{skew_out};
      if (!skew_grid.empty()) {
        emit(skew_grid, density_grid(p, grid_size));
        outs.push_back(skew_grid);
      }
      record(skew_out, "skewness", cfg, 0, outs, timer);
    } else if (*crit_cmd) {
      const McConfig c = crit_flags.config();
      const CriticalTable t = critical_values(c);
      emit(crit_out, critical_to_json(t).dump(2) + "\n");
      std::vector<std::string> outs{crit_out};
      if (!crit_csv.empty()) {
        std::ostringstream os;
        write_critical_csv(os, t);
        emit(crit_csv, os.str());
        outs.push_back(crit_csv);
      }
      Json cfg = crit_flags.json(c);
      cfg["argv"] = argv_json;
      record(crit_out, "critical-values", cfg, c.seed, outs, timer);
    } else if (*power_cmd) {
      const MmnParams alt = read_params(power_params);
      power_flags.dim = static_cast<int>(alt.dim());
      const McConfig c = power_flags.config();
      CriticalTable table;
      if (!power_table.empty()) {
        table = critical_from_json(read_json(power_table));
        if (table.n != c.sample_size)
          throw InputError("critical table was built for n=" + std::to_string(table.n));
      } else {
        table = critical_values(c);
      }
      const PowerTable pt = power_study(alt, table, c);
      emit(power_out, power_to_json(pt, table).dump(2) + "\n");
      std::vector<std::string> outs{power_out};
      if (!power_csv.empty()) {
        std::ostringstream os;
        write_power_csv(os, pt);
        emit(power_csv, os.str());
        outs.push_back(power_csv);
      }
      Json cfg = power_flags.json(c);
      cfg["argv"] = argv_json;
      cfg["alternative"] = params_to_json(alt);
      record(power_out, "power", cfg, c.seed, outs, timer);
    } else if (*bias_cmd) {
      const MmnParams truth = read_params(bias_params);
      const BiasStudy s = bias_mse_study(truth, bias_n, bias_reps, bias_seed, resolve_threads(bias_threads));
      emit(bias_out, bias_to_json(s).dump(2) + "\n");
      record(bias_out, "bias", Json{{"argv", argv_json}, {"truth", params_to_json(truth)}, {"replicates", bias_reps}},
             bias_seed, {bias_out}, timer);
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return 0;
}
