#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace idmap {

struct IntensityObservation {
  std::string station_code;
  double latitude = 0.0;
  double longitude = 0.0;
  std::string band_label;
  double intensity = 0.0;
};

void validate(const IntensityObservation& obs);

/// Regular geographic grid: nx nodes west-to-east, ny nodes south-to-north,
/// node (col 0, row 0) at (lon_min, lat_min).
struct GridSpec {
  double lat_min = 0.0;
  double lat_max = 0.0;
  double lon_min = 0.0;
  double lon_max = 0.0;
  int nx = 200;
  int ny = 200;
};

void validate(const GridSpec& spec);

struct IntensityGrid {
  GridSpec spec;
  std::vector<double> values;       // ny*nx, row-major, row 0 southernmost
  std::vector<std::uint8_t> valid;  // empty => all nodes valid (no mask)
  std::string band_label;

  double lat_at(int row) const;
  double lon_at(int col) const;
  double value_at(int row, int col) const;
  bool valid_at(int row, int col) const;
};

/// One iso-intensity polyline, vertices as (lat, lon). Closed polylines do
/// not repeat the first vertex.
struct Polyline {
  std::vector<std::array<double, 2>> vertices;
  bool closed = false;
};

struct ContourSet {
  std::string band_label;
  std::vector<double> levels;                    // strictly increasing
  std::vector<std::vector<Polyline>> polylines;  // one list per level
};

/// Inverse-distance-weighted interpolation of station intensities onto the
/// grid. Distances use an equirectangular approximation about the bbox
/// mid-latitude; a node within 1e-9 km of a station takes that station's
/// value exactly. With `max_distance_km`, nodes farther than that from every
/// station are flagged invalid (no-data) while keeping their computed value.
IntensityGrid interpolate_field(std::span<const IntensityObservation> observations,
                                const GridSpec& spec,
                                double power = 2.0,
                                std::optional<double> max_distance_km = std::nullopt);

/// Marching-squares level curves with linear edge interpolation; saddle
/// cells are resolved by the cell-center average. Cells touching invalid
/// nodes produce no segments. Output is deterministic: polylines sorted by
/// level, then by first vertex.
ContourSet extract_contours(const IntensityGrid& grid, std::span<const double> levels);

/// RFC 7946 FeatureCollection: closed polylines as Polygon features (ring
/// repeated first position, counterclockwise), open ones as LineString;
/// coordinates ordered [lon, lat]; properties {band, level}.
std::string to_geojson(const ContourSet& contours);

/// `lat,lon,intensity` rows, south-to-north then west-to-east, intensity at
/// 4 decimals, empty intensity field for no-data nodes.
std::string grid_to_csv(const IntensityGrid& grid);

}  // namespace idmap
