#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "mmn/em.hpp"
#include "mmn/mc.hpp"
#include "mmn/params.hpp"
#include "mmn/skewness.hpp"

namespace mmn {

using Json = nlohmann::ordered_json;

struct Dataset {
  std::string name;
  std::vector<std::string> columns;
  Mat values;
  std::string source;
};

// Shortest decimal that parses back to the same double.
std::string format_double(double v);

// Header row required; `columns` selects and orders columns (empty: all).
Dataset read_csv(const std::string& path, const std::vector<std::string>& columns = {});
Dataset parse_csv(std::istream& in, const std::vector<std::string>& columns = {}, const std::string& source = "");
void write_csv(std::ostream& out, const std::vector<std::string>& header, const Mat& values);
void write_csv(const std::string& path, const std::vector<std::string>& header, const Mat& values);

Json vec_to_json(const Vec& v);
Json mat_to_json(const Mat& m);
Vec vec_from_json(const Json& j);
Mat mat_from_json(const Json& j);

Json params_to_json(const MmnParams& p);
// Keys xi, Omega, delta, model ("mmne" | "mmng" | "mmntn"), nu.
MmnParams params_from_json(const Json& j);
MmnParams read_params(const std::string& path);

Json fit_to_json(const FitResult& f, std::size_t n);
Json report_to_json(const SkewnessReport& r);
Json critical_to_json(const CriticalTable& t);
CriticalTable critical_from_json(const Json& j);
Statistic statistic_from_name(const std::string& name);
Json power_to_json(const PowerTable& t, const CriticalTable& table);
Json bias_to_json(const BiasStudy& s);
void write_critical_csv(std::ostream& out, const CriticalTable& t);
void write_power_csv(std::ostream& out, const PowerTable& t);

Json read_json(const std::string& path);
void write_json(const std::string& path, const Json& j);

struct RunRecord {
  std::string command;
  Json config;
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
  double wall_seconds = 0.0;
  std::string version;
};

Json run_record_to_json(const RunRecord& r);
// Written next to the primary output as <out>.run.json.
void write_run_record(const std::string& primary_output, const RunRecord& r);

inline constexpr const char* kArtifactVersion = "0.1.0";

}  // namespace mmn
