#include "idmap/intensity.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "idmap/errors.hpp"

namespace idmap {

void validate(const IntensityModel& model) {
  if (!(model.pointwise_log_base > 1.0) || !std::isfinite(model.pointwise_log_base)) {
    throw ValidationError("intensity model: pointwise_log_base must be > 1");
  }
  if (!(model.band_log_base > 1.0) || !std::isfinite(model.band_log_base)) {
    throw ValidationError("intensity model: band_log_base must be > 1");
  }
  if (!std::isfinite(model.pointwise_offset) || !std::isfinite(model.band_offset)) {
    throw ValidationError("intensity model: offsets must be finite");
  }
  if (!(model.damping_ratio > 0.0 && model.damping_ratio < 1.0)) {
    throw ValidationError("intensity model: damping_ratio must lie in (0, 1)");
  }
}

void validate(const BandDefinition& band) {
  if (!(band.f_low_hz > 0.0) || !std::isfinite(band.f_low_hz) ||
      !(band.f_high_hz > band.f_low_hz) || !std::isfinite(band.f_high_hz)) {
    throw ValidationError("band: requires 0 < f_low_hz < f_high_hz");
  }
}

double pointwise_intensity(double eis, const IntensityModel& model) {
  validate(model);
  if (!(eis >= 0.0)) {
    throw ValidationError("pointwise_intensity: undefined intensity, EIS must be >= 0");
  }
  if (eis == 0.0) {
    throw QuiescentError("pointwise_intensity: quiescent record, EIS = 0 has no intensity");
  }
  return std::log(eis) / std::log(model.pointwise_log_base) + model.pointwise_offset;
}

const std::array<BandDefinition, 12>& band_table() {
  static const std::array<BandDefinition, 12> table = [] {
    // 13 shared edges 0.25 * 2^(j/2); consecutive bands reuse the same double.
    std::array<double, 13> edge{};
    for (int j = 0; j <= 12; ++j) {
      edge[j] = 0.25 * std::exp2(0.5 * j);
    }
    std::array<BandDefinition, 12> bands{};
    for (int k = 1; k <= 12; ++k) {
      BandDefinition& b = bands[k - 1];
      b.index = k;
      b.f_low_hz = edge[k - 1];
      b.f_high_hz = edge[k];
      b.label = "Id12" + std::to_string(k);
      b.t_low_s = 1.0 / b.f_high_hz;
      b.t_high_s = 1.0 / b.f_low_hz;
    }
    return bands;
  }();
  return table;
}

const BandDefinition& band_by_label(std::string_view label) {
  for (const BandDefinition& band : band_table()) {
    if (band.label == label) {
      return band;
    }
  }
  std::string valid;
  for (const BandDefinition& band : band_table()) {
    valid += valid.empty() ? band.label : ", " + band.label;
  }
  throw ValidationError("unknown band label '" + std::string(label) + "'; valid labels: " + valid);
}

std::vector<double> band_frequency_grid(const BandDefinition& band, int points) {
  validate(band);
  if (points < 2) {
    throw ValidationError("band grid: grid_points_per_band must be >= 2");
  }
  const double u0 = std::log(band.f_low_hz);
  const double u1 = std::log(band.f_high_hz);
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    grid[i] = std::exp(u0 + (u1 - u0) * i / (points - 1));
  }
  grid.front() = band.f_low_hz;  // edges exact, shared between adjacent bands
  grid.back() = band.f_high_hz;
  return grid;
}

std::vector<double> composite_frequency_grid(int points_per_band) {
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(12 * points_per_band));
  for (const BandDefinition& band : band_table()) {
    std::vector<double> g = band_frequency_grid(band, points_per_band);
    const std::size_t skip = grid.empty() ? 0 : 1;  // shared edge already present
    grid.insert(grid.end(), g.begin() + skip, g.end());
  }
  return grid;
}

namespace {

double lerp_u(double u0, double e0, double u1, double e1, double u) {
  if (u1 == u0) return e0;
  return e0 + (e1 - e0) * (u - u0) / (u1 - u0);
}

}  // namespace

BandIntensityResult band_averaged_intensity(const EisSpectrum& spectrum,
                                            const BandDefinition& band,
                                            const IntensityModel& model) {
  validate(model);
  validate(band);
  validate(spectrum);

  const auto& fs = spectrum.frequencies_hz;
  const auto& es = spectrum.eis_values;
  constexpr double kEdgeTol = 1e-12;  // relative slack on band-edge coverage
  if (fs.front() > band.f_low_hz * (1.0 + kEdgeTol) ||
      fs.back() < band.f_high_hz * (1.0 - kEdgeTol)) {
    throw CoverageError("band " + band.label + ": spectrum grid [" + std::to_string(fs.front()) +
                        ", " + std::to_string(fs.back()) + "] Hz does not cover [" +
                        std::to_string(band.f_low_hz) + ", " + std::to_string(band.f_high_hz) +
                        "] Hz");
  }
  const double f_lo = std::clamp(band.f_low_hz, fs.front(), fs.back());
  const double f_hi = std::clamp(band.f_high_hz, fs.front(), fs.back());

  // Grid points inside the closed band, plus interpolated edge values in
  // u = ln f when the edges are not grid points.
  const auto lo_it = std::lower_bound(fs.begin(), fs.end(), f_lo);
  const auto hi_it = std::upper_bound(fs.begin(), fs.end(), f_hi);
  const std::size_t i0 = static_cast<std::size_t>(lo_it - fs.begin());
  const std::size_t i1 = static_cast<std::size_t>(hi_it - fs.begin());  // one past
  if (i1 - i0 < 2) {
    throw CoverageError("band " + band.label + ": fewer than 2 spectrum grid points inside the band");
  }

  std::vector<double> us;
  std::vector<double> ev;
  us.reserve(i1 - i0 + 2);
  ev.reserve(i1 - i0 + 2);
  if (fs[i0] > f_lo) {
    us.push_back(std::log(f_lo));
    ev.push_back(lerp_u(std::log(fs[i0 - 1]), es[i0 - 1], std::log(fs[i0]), es[i0], us.back()));
  }
  for (std::size_t i = i0; i < i1; ++i) {
    us.push_back(std::log(fs[i]));
    ev.push_back(es[i]);
  }
  if (fs[i1 - 1] < f_hi) {
    us.push_back(std::log(f_hi));
    ev.push_back(lerp_u(std::log(fs[i1 - 1]), es[i1 - 1], std::log(fs[i1]), es[i1], us.back()));
  }

  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < us.size(); ++i) {
    integral += 0.5 * (ev[i] + ev[i + 1]) * (us[i + 1] - us[i]);
  }
  const double mean = std::max(0.0, integral) / std::log(band.f_high_hz / band.f_low_hz);

  BandIntensityResult result;
  result.band = band;
  result.eis_log_mean = mean;
  if (mean == 0.0) {
    throw QuiescentError("band " + band.label + ": quiescent band, EIS vanishes over the band");
  }
  result.intensity = std::log(mean) / std::log(model.band_log_base) + model.band_offset;
  return result;
}

BandIntensityResult station_band_intensity(std::span<const Accelerogram> components,
                                           const BandDefinition& band,
                                           const IntensityModel& model,
                                           int grid_points_per_band,
                                           bool include_vertical,
                                           const WarningSink& warn) {
  if (components.empty()) {
    throw ValidationError("station_band_intensity: component list is empty");
  }
  for (const Accelerogram& comp : components) {
    if (comp.station_code != components.front().station_code) {
      throw ValidationError("station_band_intensity: mixed station codes '" +
                            components.front().station_code + "' and '" + comp.station_code + "'");
    }
  }
  const std::vector<double> grid = band_frequency_grid(band, grid_points_per_band);

  std::optional<BandIntensityResult> best;
  bool any_usable = false;
  for (const Accelerogram& comp : components) {
    if (comp.component == Component::V && !include_vertical) {
      continue;
    }
    any_usable = true;
    const EisSpectrum spectrum = eis_spectrum(comp, grid, model.damping_ratio, warn);
    try {
      BandIntensityResult result = band_averaged_intensity(spectrum, band, model);
      result.component_used = comp.component;
      if (!best || result.intensity > best->intensity) {
        best = std::move(result);
      }
    } catch (const QuiescentError&) {
      // component carries no energy in this band; the other components decide
    }
  }
  if (!any_usable) {
    throw ValidationError("station_band_intensity: no horizontal components for station '" +
                          components.front().station_code + "'");
  }
  if (!best) {
    throw QuiescentError("station_band_intensity: all components of station '" +
                         components.front().station_code + "' are quiescent in band " + band.label);
  }
  return *best;
}

}  // namespace idmap
