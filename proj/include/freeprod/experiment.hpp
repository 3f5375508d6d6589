#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace freeprod {

using Json = nlohmann::json;

inline constexpr int kConfigVersion = 1;
inline constexpr const char* kOutDirEnv = "FREEPROD_OUT_DIR";

// Command-line overrides applied on top of a config file.
struct RunOptions {
  std::optional<std::uint64_t> seed;
  double tol_scale = 1.0;
  std::optional<std::string> out_dir;
};

/// Validated experiment description. `normalized` is the config with every
/// default filled in; it is echoed into the report and parses back to the
/// same config.
struct ExperimentConfig {
  std::string kind;
  std::uint64_t seed = 0;
  std::map<std::string, double> tolerances;
  std::string out_dir;
  std::string report_name;
  Json params;
  Json normalized;
};

// Throws Error(Parse) naming the offending field.
ExperimentConfig parse_config(const Json& doc, const RunOptions& options = {});
ExperimentConfig parse_config_file(const std::string& path, const RunOptions& options = {});

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = true;
};

struct Series {
  std::vector<std::string> columns;
  std::vector<Json> rows;  // each row an array matching `columns`
};

struct RunReport {
  std::string kind;
  Json config;
  std::vector<Check> checks;
  Json data = Json::object();
  std::map<std::string, Series> series;
  std::vector<std::string> warnings;
  bool conclusive = true;
  std::map<std::string, double> timings_ms;

  bool passed() const;
  // Report document; timings live under "timings" and are the only
  // run-dependent field.
  Json to_json() const;
};

RunReport run_experiment(const ExperimentConfig& config);

// Writes the report into config.out_dir and returns the path.
std::string write_report(const ExperimentConfig& config, const RunReport& report);

// Names of the series stored in a report document.
std::vector<std::string> series_names(const Json& report);

// CSV with a header row. Throws Error(InvalidArgument) for an unknown series.
std::string series_csv(const Json& report, const std::string& series);

// Writes <out_dir>/<series>.csv from a report file and returns the path.
std::string emit_series(const std::string& report_path, const std::string& series,
                        const std::string& out_dir);

// Output directory: explicit value, else $FREEPROD_OUT_DIR, else ".".
std::string default_out_dir(const std::optional<std::string>& explicit_dir);

}  // namespace freeprod
