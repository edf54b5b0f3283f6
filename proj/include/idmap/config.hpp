#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "idmap/intensity.hpp"

namespace idmap {

/// All tunable constants of the pipeline. Precedence: built-in defaults,
/// then config file, then command-line flags.
struct RunConfig {
  double damping_ratio = 0.05;
  double pointwise_log_base = 4.0;
  double pointwise_offset = 5.75;
  double band_log_base = 7.5;
  double band_offset = 6.45;
  int grid_points_per_band = 25;
  double idw_power = 2.0;
  int grid_nx = 200;
  int grid_ny = 200;
  std::vector<double> contour_levels;  // default 5.0:0.5:9.0
  std::optional<double> max_distance_mask_km;

  RunConfig();

  IntensityModel intensity_model() const;
  void validate() const;
};

/// "start:step:stop" or a comma-separated list; strictly increasing.
std::vector<double> parse_contour_levels(const std::string& text);

/// Applies one `key = value` entry; unknown keys raise ValidationError.
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);

/// Flat key = value file, `#` comments. Unknown keys are rejected.
RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical (key, value) listing of the effective config, for manifests.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg);

}  // namespace idmap
