#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "apframe/wavelet.hpp"
#include "json.hpp"

namespace apframe::cli {

/// Raised for malformed configs; `where` is a field path or "line L, column C".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

struct Grids {
  double lambda_lo = 1e-3;
  double lambda_hi = 1e3;
  int lambda_points = 10000;
  std::vector<double> T{1000.0};
  double dt = 0.25;
  int N = 16384;
  JRange j_window{-2, 4};
  int q_J = 2;
  double q_max = 8.0;
  std::vector<double> fiber_lambdas;
  std::vector<double> eps;
  std::vector<double> tau{0.0, 1.0, 2.0};
};

struct ExperimentConfig {
  std::string experiment;
  nlohmann::json wavelet;
  nlohmann::json measure;
  int a = 2;
  double b = 1.0;
  std::vector<double> alphas;
  Grids grids;
  std::uint64_t seed = 1;
  int replicas = 1;
  int bins = 0;
  std::string mode = "complex";
  double tolerance = 0.1;
  double pass_fraction = 0.9;
  std::optional<double> A;
  std::optional<double> B;
  double window = 65536.0;
  double eps0 = 0x1p-20;
  bool realized_weighted = false;
  // User assertion that b satisfies the periodization condition of the band.
  bool sampling_asserted = false;
  std::string report = "report.json";
};

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"frame-bounds", "ap-check", "ergodic", "smoothness", "simulate"};
  return kinds;
}

/// Reads a JSON file; parse errors carry the line and column.
nlohmann::json load_config_file(const std::string& path);

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);

/// FNV-1a 64 of the canonical serialization of the parsed config.
std::uint64_t config_hash(const ExperimentConfig& c);

/// Static checks only; an empty list means the config is runnable.
std::vector<std::string> validate(const nlohmann::json& raw, const std::string& base_dir = ".");

struct RunOptions {
  unsigned threads = 1;
  std::string out_dir = ".";
  bool plot = false;
};

struct RunResult {
  int exit_code = 0;
  nlohmann::json report;
  std::vector<std::string> files;
};

/// Runs one experiment and writes its report, traces and plots under out_dir.
/// Exit code 0 when the verdict passes, 2 when it fails.
RunResult run(const ExperimentConfig& config, const RunOptions& opt, const std::string& base_dir = ".");

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Minimal line plot: axes, tick labels and one polyline per series.
void write_svg(const std::string& path, const std::string& title, const std::vector<Series>& series,
               bool log_x = false, bool log_y = false);

}  // namespace apframe::cli
