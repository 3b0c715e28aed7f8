#include "mmn/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "mmn/error.hpp"

namespace mmn {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc()) throw Error(ErrorKind::InvalidInput, "cannot format number");
  return std::string(buf, res.ptr);
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n\"");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n\"");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_number(const std::string& s, std::size_t row, const std::string& col) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (b != e && *b == '+') ++b;
  const auto res = std::from_chars(b, e, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != e || !std::isfinite(v))
    throw Error(ErrorKind::InvalidInput,
                "row " + std::to_string(row) + ", column " + col + ": not a finite number '" + s + "'");
  return v;
}

}  // namespace

Dataset parse_csv(std::istream& in, const std::vector<std::string>& columns, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::InvalidInput, "empty CSV, header row expected");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split(line);
  std::vector<std::size_t> pick;
  Dataset d;
  d.source = source;
  if (columns.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i) pick.push_back(i);
    d.columns = header;
  } else {
    for (const auto& c : columns) {
      std::size_t i = 0;
      while (i < header.size() && header[i] != c) ++i;
      if (i == header.size()) throw Error(ErrorKind::InvalidInput, "column '" + c + "' not in header");
      pick.push_back(i);
    }
    d.columns = columns;
  }
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw Error(ErrorKind::InvalidInput, "row " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                                               " fields, header has " + std::to_string(header.size()));
    std::vector<double> r;
    for (auto i : pick) r.push_back(parse_number(cells[i], lineno, header[i]));
    rows.push_back(std::move(r));
  }
  d.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(pick.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < pick.size(); ++j)
      d.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return d;
}

Dataset read_csv(const std::string& path, const std::vector<std::string>& columns) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot open " + path);
  Dataset d = parse_csv(in, columns, path);
  const auto slash = path.find_last_of('/');
  d.name = path.substr(slash == std::string::npos ? 0 : slash + 1);
  return d;
}

void write_csv(std::ostream& out, const std::vector<std::string>& header, const Mat& values) {
  if (static_cast<Eigen::Index>(header.size()) != values.cols())
    throw Error(ErrorKind::DimensionMismatch, "header width differs from column count");
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) out << (j ? "," : "") << format_double(values(i, j));
    out << '\n';
  }
}

void write_csv(const std::string& path, const std::vector<std::string>& header, const Mat& values) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidInput, "cannot write " + path);
  write_csv(out, header, values);
}

Json vec_to_json(const Vec& v) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

Json mat_to_json(const Mat& m) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) j.push_back(vec_to_json(m.row(i).transpose()));
  return j;
}

Vec vec_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorKind::InvalidInput, "expected a numeric array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(ErrorKind::InvalidInput, "expected a numeric array");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Mat mat_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw Error(ErrorKind::InvalidInput, "expected a nested numeric array");
  const auto r = static_cast<Eigen::Index>(j.size());
  const auto c = vec_from_json(j[0]).size();
  Mat m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const Vec row = vec_from_json(j[static_cast<std::size_t>(i)]);
    if (row.size() != c) throw Error(ErrorKind::DimensionMismatch, "ragged matrix rows");
    m.row(i) = row.transpose();
  }
  return m;
}

Json params_to_json(const MmnParams& p) {
  Json j;
  j["xi"] = vec_to_json(p.xi);
  j["Omega"] = mat_to_json(p.omega);
  j["delta"] = vec_to_json(p.delta);
  switch (p.mixing.kind()) {
    case MixingLaw::Kind::Exponential:
      j["model"] = "mmne";
      break;
    case MixingLaw::Kind::Gamma:
      j["model"] = "mmng";
      j["nu"] = p.mixing.nu();
      break;
    case MixingLaw::Kind::TruncNormal:
      j["model"] = "mmntn";
      j["a"] = p.mixing.a();
      j["b"] = p.mixing.b();
      break;
  }
  return j;
}

MmnParams params_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidInput, "params must be a JSON object");
  for (const char* k : {"xi", "Omega", "delta"})
    if (!j.contains(k)) throw Error(ErrorKind::InvalidInput, std::string("params missing '") + k + "'");
  MmnParams p;
  p.xi = vec_from_json(j["xi"]);
  p.omega = mat_from_json(j["Omega"]);
  p.delta = vec_from_json(j["delta"]);
  const std::string model = j.value("model", std::string("mmne"));
  if (model == "mmne") {
    p.mixing = MixingLaw::exponential();
  } else if (model == "mmng") {
    if (!j.contains("nu") || !j["nu"].is_number()) throw Error(ErrorKind::InvalidInput, "mmng params need 'nu'");
    p.mixing = MixingLaw::gamma(j["nu"].get<double>());
  } else if (model == "mmntn") {
    p.mixing = MixingLaw::trunc_normal(j.value("a", 0.0), j.value("b", 1.0));
  } else {
    throw Error(ErrorKind::InvalidInput, "unknown model '" + model + "'");
  }
  validate(p);
  return p;
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidInput, path + ": " + e.what());
  }
}

void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidInput, "cannot write " + path);
  out << j.dump(2) << '\n';
}

MmnParams read_params(const std::string& path) {
  const Json j = read_json(path);
  try {
    return params_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidInput, path + ": " + e.what());
  }
}

Json fit_to_json(const FitResult& f, std::size_t n) {
  Json j = params_to_json(f.params);
  j["loglik"] = f.loglik;
  j["aic"] = f.aic;
  j["bic"] = f.bic;
  j["k"] = f.n_params;
  j["n"] = n;
  j["iters"] = f.iters;
  j["converged"] = f.converged;
  j["loglik_trace"] = f.loglik_trace;
  return j;
}

Json report_to_json(const SkewnessReport& r) {
  Json j;
  j["mardia"] = r.mardia;
  j["malkovich_afifi"] = r.malkovich_afifi;
  j["srivastava"] = r.srivastava;
  j["mori"] = vec_to_json(r.mori);
  j["kollo"] = vec_to_json(r.kollo);
  j["bbq_t"] = vec_to_json(r.bbq_t);
  j["bbq_qstar"] = r.bbq_qstar;
  j["isogai_si"] = r.isogai_si;
  j["isogai_sc"] = vec_to_json(r.isogai_sc);
  Json s = Json::object();
  for (const auto& [k, v] : r.scalarized) s[k] = v;
  j["scalarized"] = s;
  j["delta_star"] = r.delta_star;
  j["mode_star"] = r.mode_star;
  return j;
}

Json critical_to_json(const CriticalTable& t) {
  Json j;
  j["n"] = t.n;
  j["p"] = t.p;
  j["replicates"] = t.replicates;
  j["seed"] = t.seed;
  j["failures"] = t.failures;
  j["nonconverged"] = t.nonconverged;
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    Json x;
    x["statistic"] = statistic_name(r.stat);
    x["one_sided"] = one_sided(r.stat);
    x["lower_025"] = r.lower_025;
    x["upper_025"] = r.upper_025;
    x["upper_05"] = r.upper_05;
    rows.push_back(x);
  }
  j["statistics"] = rows;
  return j;
}


Statistic statistic_from_name(const std::string& name) {
  for (Statistic s : kAllStatistics)
    if (statistic_name(s) == name) return s;
  throw Error(ErrorKind::InvalidInput, "unknown statistic '" + name + "'");
}

CriticalTable critical_from_json(const Json& j) {
  try {
    CriticalTable t;
    t.n = j.at("n").get<std::size_t>();
    t.p = j.at("p").get<std::size_t>();
    t.replicates = j.at("replicates").get<std::size_t>();
    t.seed = j.at("seed").get<std::uint64_t>();
    t.failures = j.value("failures", std::size_t{0});
    t.nonconverged = j.value("nonconverged", std::size_t{0});
    for (const auto& x : j.at("statistics")) {
      CriticalRow r;
      r.stat = statistic_from_name(x.at("statistic").get<std::string>());
      r.lower_025 = x.at("lower_025").get<double>();
      r.upper_025 = x.at("upper_025").get<double>();
      r.upper_05 = x.at("upper_05").get<double>();
      t.rows.push_back(r);
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidInput, std::string("critical table: ") + e.what());
  }
}

Json power_to_json(const PowerTable& t, const CriticalTable& table) {
  Json j;
  j["replicates"] = t.replicates;
  j["failures"] = t.failures;
  j["nonconverged"] = t.nonconverged;
  j["null_table"] = critical_to_json(table);
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    Json x;
    x["statistic"] = statistic_name(r.stat);
    x["power"] = r.power;
    rows.push_back(x);
  }
  j["power"] = rows;
  return j;
}

Json bias_to_json(const BiasStudy& s) {
  Json j;
  j["failures"] = s.failures;
  j["nonmonotone"] = s.nonmonotone;
  j["nonconverged"] = s.nonconverged;
  Json rows = Json::array();
  for (const auto& r : s.rows) {
    Json x;
    x["parameter"] = r.parameter;
    x["n"] = r.n;
    x["truth"] = r.truth;
    x["mean"] = r.mean;
    x["sd"] = r.sd;
    x["bias"] = r.bias;
    x["mse"] = r.mse;
    rows.push_back(x);
  }
  j["rows"] = rows;
  return j;
}

void write_critical_csv(std::ostream& out, const CriticalTable& t) {
  out << "statistic,one_sided,lower_025,upper_025,upper_05\n";
  for (const auto& r : t.rows)
    out << statistic_name(r.stat) << ',' << (one_sided(r.stat) ? 1 : 0) << ',' << format_double(r.lower_025) << ','
        << format_double(r.upper_025) << ',' << format_double(r.upper_05) << '\n';
}

void write_power_csv(std::ostream& out, const PowerTable& t) {
  out << "statistic,power\n";
  for (const auto& r : t.rows) out << statistic_name(r.stat) << ',' << format_double(r.power) << '\n';
}

Json run_record_to_json(const RunRecord& r) {
  Json j;
  j["command"] = r.command;
  j["config"] = r.config;
  j["seed"] = r.seed;
  j["outputs"] = r.outputs;
  j["wall_seconds"] = r.wall_seconds;
  j["artifact_version"] = r.version.empty() ? std::string(kArtifactVersion) : r.version;
  return j;
}

void write_run_record(const std::string& primary_output, const RunRecord& r) {
  write_json(primary_output + ".run.json", run_record_to_json(r));
}

}  // namespace mmn
