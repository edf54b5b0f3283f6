#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "idmap/spectral.hpp"

namespace idmap {

/// Calibration constants of the intensity formulas. Defaults are the
/// published values; they are configurable for sensitivity studies.
struct IntensityModel {
  double pointwise_log_base = 4.0;
  double pointwise_offset = 5.75;
  double band_log_base = 7.5;
  double band_offset = 6.45;
  double damping_ratio = 0.05;
};

void validate(const IntensityModel& model);

/// One frequency band [f_low, f_high] with its period mirror
/// (t_low = 1/f_high, t_high = 1/f_low).
struct BandDefinition {
  int index = 0;  // 1..12 for the canonical table, 0 for ad-hoc bands
  double f_low_hz = 0.0;
  double f_high_hz = 0.0;
  std::string label;
  double t_low_s = 0.0;
  double t_high_s = 0.0;
};

void validate(const BandDefinition& band);

struct BandIntensityResult {
  BandDefinition band;
  double intensity = 0.0;
  double eis_log_mean = 0.0;  // the bracketed band mean, m^2/s^3
  Component component_used = Component::Unspecified;
};

/// Pointwise instrumental intensity log_base(eis) + offset. Requires eis > 0;
/// eis == 0 raises QuiescentError, eis < 0 raises ValidationError.
double pointwise_intensity(double eis, const IntensityModel& model = {});

/// Band-averaged intensity: the log-frequency mean
///   M = (1 / ln(f_high/f_low)) * integral of EIS(f) df/f
/// is computed by trapezoidal quadrature in u = ln f on the spectrum grid
/// restricted to the band (band edges included by interpolation in u when
/// they are not grid points), then mapped to log_base(M) + offset.
BandIntensityResult band_averaged_intensity(const EisSpectrum& spectrum,
                                            const BandDefinition& band,
                                            const IntensityModel& model = {});

/// The twelve bands tiling [0.25, 16] Hz with frequency ratio sqrt(2),
/// ascending in frequency, labelled "Id121".."Id1212".
const std::array<BandDefinition, 12>& band_table();

/// Looks up a canonical band by label; throws ValidationError listing the
/// valid labels otherwise.
const BandDefinition& band_by_label(std::string_view label);

/// Log-spaced frequency grid over one band, inclusive of both edges.
std::vector<double> band_frequency_grid(const BandDefinition& band, int points);

/// Union of the twelve per-band grids with shared edges deduplicated
/// (12 * points - 11 frequencies).
std::vector<double> composite_frequency_grid(int points_per_band);

/// Band intensity of one station: per-component band_averaged_intensity over
/// a log-spaced grid of `grid_points_per_band` points, keeping the maximum.
/// Exact ties keep the first component in input order. Vertical components
/// are excluded unless `include_vertical` is set. Components that are
/// quiescent in the band are skipped; if all are, QuiescentError is raised.
BandIntensityResult station_band_intensity(std::span<const Accelerogram> components,
                                           const BandDefinition& band,
                                           const IntensityModel& model = {},
                                           int grid_points_per_band = 25,
                                           bool include_vertical = false,
                                           const WarningSink& warn = {});

}  // namespace idmap
