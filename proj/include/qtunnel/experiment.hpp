#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "qtunnel/config.hpp"

namespace qtunnel {

struct PointRecord {
  std::size_t index = 0;
  double sweep_value = 0.0;
  bool ok = false;
  std::string error;
  std::string error_kind;  // "config", "numerical", "domain" or "other"
  double captured_norm = 0.0;
  std::vector<std::string> files;
  std::vector<std::string> warnings;
  std::vector<std::pair<std::string, double>> stage_seconds;
  std::map<std::string, double> results;  // scalar diagnostics (t_star, gaps, times)
};

struct RunManifest {
  std::vector<PointRecord> points;
  std::filesystem::path manifest_path;

  std::size_t failed() const;
};

struct RunOptions {
  /// Worker threads for sweep points; 0 uses the hardware concurrency.
  unsigned threads = 0;
};

/// Solve, project and write every enabled output for each sweep point, plus manifest.json.
/// A failing point is recorded in the manifest; the remaining points still run.
RunManifest run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                           const RunOptions& options = {});

/// 0 when every point succeeded, 3 when some failed, 2 when all failed.
int exit_code(const RunManifest& manifest);

/// Human-readable summary: geometry, first levels, captured norm and warnings.
std::string describe(const ExperimentConfig& config);

/// Output file name for one series at one sweep point, e.g. observables_002.csv.
std::string point_file(const std::string& stem, std::size_t index);

}  // namespace qtunnel
