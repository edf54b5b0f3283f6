#include "idmap/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>

#include <nlohmann/json.hpp>

#include "idmap/errors.hpp"

namespace idmap {

namespace {

constexpr double kEarthRadiusKm = 6371.0;
constexpr double kStationSnapKm = 1e-9;  // node this close to a station takes its value

struct Projection {
  double kx;  // km per degree longitude at the bbox mid-latitude
  double ky;  // km per degree latitude

  static Projection for_bbox(const GridSpec& spec) {
    const double deg = std::numbers::pi / 180.0;
    const double mid_lat = 0.5 * (spec.lat_min + spec.lat_max);
    return {kEarthRadiusKm * deg * std::cos(mid_lat * deg), kEarthRadiusKm * deg};
  }

  double distance_km(double lat_a, double lon_a, double lat_b, double lon_b) const {
    const double dx = kx * (lon_a - lon_b);
    const double dy = ky * (lat_a - lat_b);
    return std::hypot(dx, dy);
  }
};

}  // namespace

void validate(const IntensityObservation& obs) {
  if (!std::isfinite(obs.intensity)) {
    throw ValidationError("observation " + obs.station_code + ": intensity must be finite");
  }
  if (!(obs.latitude >= -90.0 && obs.latitude <= 90.0) ||
      !(obs.longitude >= -180.0 && obs.longitude <= 180.0)) {
    throw ValidationError("observation " + obs.station_code + ": coordinates out of range");
  }
}

void validate(const GridSpec& spec) {
  if (!(spec.lat_max > spec.lat_min) || !(spec.lon_max > spec.lon_min)) {
    throw ValidationError("grid: requires lat_max > lat_min and lon_max > lon_min");
  }
  if (spec.nx < 2 || spec.ny < 2) {
    throw ValidationError("grid: nx and ny must be >= 2");
  }
}

double IntensityGrid::lat_at(int row) const {
  return spec.lat_min + (spec.lat_max - spec.lat_min) * row / (spec.ny - 1);
}

double IntensityGrid::lon_at(int col) const {
  return spec.lon_min + (spec.lon_max - spec.lon_min) * col / (spec.nx - 1);
}

double IntensityGrid::value_at(int row, int col) const {
  return values[static_cast<std::size_t>(row) * spec.nx + col];
}

bool IntensityGrid::valid_at(int row, int col) const {
  return valid.empty() || valid[static_cast<std::size_t>(row) * spec.nx + col] != 0;
}

IntensityGrid interpolate_field(std::span<const IntensityObservation> observations,
                                const GridSpec& spec,
                                double power,
                                std::optional<double> max_distance_km) {
  validate(spec);
  if (observations.empty()) {
    throw ValidationError("interpolate_field: no observations");
  }
  if (!(power > 0.0) || !std::isfinite(power)) {
    throw ValidationError("interpolate_field: power must be > 0");
  }
  if (max_distance_km && !(*max_distance_km > 0.0)) {
    throw ValidationError("interpolate_field: max_distance_km must be > 0");
  }
  for (const IntensityObservation& obs : observations) {
    validate(obs);
    if (obs.band_label != observations.front().band_label) {
      throw ValidationError("interpolate_field: mixed band labels '" +
                            observations.front().band_label + "' and '" + obs.band_label + "'");
    }
  }

  const Projection proj = Projection::for_bbox(spec);
  IntensityGrid grid;
  grid.spec = spec;
  grid.band_label = observations.front().band_label;
  grid.values.resize(static_cast<std::size_t>(spec.nx) * spec.ny);
  if (max_distance_km) {
    grid.valid.assign(grid.values.size(), 1);
  }

  std::vector<double> distances;
  distances.reserve(observations.size());
  for (int row = 0; row < spec.ny; ++row) {
    const double lat = grid.lat_at(row);
    for (int col = 0; col < spec.nx; ++col) {
      const double lon = grid.lon_at(col);
      distances.clear();
      double min_dist = std::numeric_limits<double>::infinity();
      const IntensityObservation* snapped = nullptr;
      for (const IntensityObservation& obs : observations) {
        const double d = proj.distance_km(lat, lon, obs.latitude, obs.longitude);
        distances.push_back(d);
        min_dist = std::min(min_dist, d);
        if (d < kStationSnapKm && !snapped) {
          snapped = &obs;
        }
      }
      const std::size_t idx = static_cast<std::size_t>(row) * spec.nx + col;
      if (snapped) {
        grid.values[idx] = snapped->intensity;
      } else {
        // weights scaled by the nearest distance: the closest station gets
        // weight 1 exactly, so single-station fields and symmetric ties are
        // exact and extreme powers cannot overflow
        double weight_sum = 0.0;
        double weighted_value = 0.0;
        for (std::size_t k = 0; k < observations.size(); ++k) {
          const double w = std::pow(min_dist / distances[k], power);
          weight_sum += w;
          weighted_value += w * observations[k].intensity;
        }
        grid.values[idx] = weighted_value / weight_sum;
      }
      if (max_distance_km && min_dist > *max_distance_km) {
        grid.valid[idx] = 0;
      }
    }
  }
  return grid;
}

namespace {

using Vertex = std::array<double, 2>;  // (lat, lon)

// Undirected grid-edge ids: horizontal edges (between lon-adjacent nodes)
// first, vertical edges after. A level crossing on an edge is interpolated
// from the exact same two node values for both adjacent cells.
struct EdgeIndexer {
  int nx;
  int ny;

  std::int64_t horizontal(int col, int row) const {
    return static_cast<std::int64_t>(row) * (nx - 1) + col;
  }
  std::int64_t vertical(int col, int row) const {
    return static_cast<std::int64_t>(nx - 1) * ny + static_cast<std::int64_t>(row) * nx + col;
  }
};

Vertex crossing_point(const IntensityGrid& grid, const EdgeIndexer& ix, std::int64_t edge,
                      double level) {
  const std::int64_t h_count = static_cast<std::int64_t>(ix.nx - 1) * ix.ny;
  if (edge < h_count) {
    const int row = static_cast<int>(edge / (ix.nx - 1));
    const int col = static_cast<int>(edge % (ix.nx - 1));
    const double v0 = grid.value_at(row, col);
    const double v1 = grid.value_at(row, col + 1);
    const double t = (level - v0) / (v1 - v0);
    const double lon0 = grid.lon_at(col);
    const double lon1 = grid.lon_at(col + 1);
    return {grid.lat_at(row), lon0 + t * (lon1 - lon0)};
  }
  const std::int64_t v_edge = edge - h_count;
  const int row = static_cast<int>(v_edge / ix.nx);
  const int col = static_cast<int>(v_edge % ix.nx);
  const double v0 = grid.value_at(row, col);
  const double v1 = grid.value_at(row + 1, col);
  const double t = (level - v0) / (v1 - v0);
  const double lat0 = grid.lat_at(row);
  const double lat1 = grid.lat_at(row + 1);
  return {lat0 + t * (lat1 - lat0), grid.lon_at(col)};
}

bool vertex_less(const Vertex& a, const Vertex& b) {
  if (a[0] != b[0]) return a[0] < b[0];
  return a[1] < b[1];
}

bool polyline_less(const Polyline& a, const Polyline& b) {
  const std::size_t n = std::min(a.vertices.size(), b.vertices.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a.vertices[i] != b.vertices[i]) return vertex_less(a.vertices[i], b.vertices[i]);
  }
  return a.vertices.size() < b.vertices.size();
}

// Canonical vertex order: open chains start at their smaller endpoint;
// closed loops start at their smallest vertex and run toward the smaller
// neighbour. Makes output independent of chaining order.
void canonicalize(Polyline& line) {
  auto& v = line.vertices;
  if (v.size() < 2) return;
  if (!line.closed) {
    if (vertex_less(v.back(), v.front())) {
      std::reverse(v.begin(), v.end());
    }
    return;
  }
  const auto min_it = std::min_element(v.begin(), v.end(), vertex_less);
  std::rotate(v.begin(), min_it, v.end());
  if (v.size() > 2 && vertex_less(v.back(), v[1])) {
    std::reverse(v.begin() + 1, v.end());
  }
}

std::vector<Polyline> contour_level(const IntensityGrid& grid, double level) {
  const int nx = grid.spec.nx;
  const int ny = grid.spec.ny;
  const EdgeIndexer ix{nx, ny};

  // Per-cell segments between crossed edges. Corner bit k set means the
  // corner value is >= level; corners: 0 SW, 1 SE, 2 NE, 3 NW.
  std::vector<std::pair<std::int64_t, std::int64_t>> segments;
  for (int row = 0; row + 1 < ny; ++row) {
    for (int col = 0; col + 1 < nx; ++col) {
      if (!grid.valid_at(row, col) || !grid.valid_at(row, col + 1) ||
          !grid.valid_at(row + 1, col) || !grid.valid_at(row + 1, col + 1)) {
        continue;
      }
      const double v00 = grid.value_at(row, col);
      const double v10 = grid.value_at(row, col + 1);
      const double v11 = grid.value_at(row + 1, col + 1);
      const double v01 = grid.value_at(row + 1, col);
      const int code = (v00 >= level ? 1 : 0) | (v10 >= level ? 2 : 0) |
                       (v11 >= level ? 4 : 0) | (v01 >= level ? 8 : 0);
      if (code == 0 || code == 15) continue;

      const std::int64_t bottom = ix.horizontal(col, row);
      const std::int64_t top = ix.horizontal(col, row + 1);
      const std::int64_t left = ix.vertical(col, row);
      const std::int64_t right = ix.vertical(col + 1, row);

      switch (code) {
        case 1: case 14: segments.emplace_back(left, bottom); break;
        case 2: case 13: segments.emplace_back(bottom, right); break;
        case 3: case 12: segments.emplace_back(left, right); break;
        case 4: case 11: segments.emplace_back(right, top); break;
        case 6: case 9: segments.emplace_back(bottom, top); break;
        case 7: case 8: segments.emplace_back(left, top); break;
        case 5:   // SW and NE inside; join across the cell centre if it is inside
          if (0.25 * (v00 + v10 + v11 + v01) >= level) {
            segments.emplace_back(left, top);
            segments.emplace_back(bottom, right);
          } else {
            segments.emplace_back(left, bottom);
            segments.emplace_back(right, top);
          }
          break;
        case 10:  // SE and NW inside
          if (0.25 * (v00 + v10 + v11 + v01) >= level) {
            segments.emplace_back(left, bottom);
            segments.emplace_back(right, top);
          } else {
            segments.emplace_back(left, top);
            segments.emplace_back(bottom, right);
          }
          break;
        default: break;
      }
    }
  }

  // Chain segments into polylines. Every crossing joins at most two
  // segments, so chains are simple paths or loops.
  std::map<std::int64_t, std::vector<std::size_t>> adjacency;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    adjacency[segments[s].first].push_back(s);
    adjacency[segments[s].second].push_back(s);
  }

  std::vector<bool> used(segments.size(), false);
  std::vector<Polyline> lines;

  auto walk = [&](std::int64_t start, bool closed) {
    Polyline line;
    line.closed = closed;
    std::int64_t node = start;
    line.vertices.push_back(crossing_point(grid, ix, node, level));
    while (true) {
      std::size_t next_seg = segments.size();
      for (std::size_t s : adjacency.find(node)->second) {
        if (!used[s]) {
          next_seg = s;
          break;
        }
      }
      if (next_seg == segments.size()) break;
      used[next_seg] = true;
      node = segments[next_seg].first == node ? segments[next_seg].second
                                              : segments[next_seg].first;
      if (closed && node == start) break;
      line.vertices.push_back(crossing_point(grid, ix, node, level));
    }
    canonicalize(line);
    lines.push_back(std::move(line));
  };

  for (const auto& [node, segs] : adjacency) {  // std::map: ascending node ids
    if (segs.size() == 1 && !used[segs.front()]) {
      walk(node, false);
    }
  }
  for (const auto& [node, segs] : adjacency) {
    for (std::size_t s : segs) {
      if (!used[s]) {
        walk(node, true);
        break;
      }
    }
  }

  std::sort(lines.begin(), lines.end(), polyline_less);
  return lines;
}

}  // namespace

ContourSet extract_contours(const IntensityGrid& grid, std::span<const double> levels) {
  validate(grid.spec);
  if (grid.values.size() != static_cast<std::size_t>(grid.spec.nx) * grid.spec.ny) {
    throw ValidationError("contours: grid values do not match spec dimensions");
  }
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!std::isfinite(levels[i]) || (i > 0 && !(levels[i] > levels[i - 1]))) {
      throw ValidationError("contours: levels must be finite and strictly increasing");
    }
  }

  ContourSet out;
  out.band_label = grid.band_label;
  out.levels.assign(levels.begin(), levels.end());
  out.polylines.reserve(levels.size());
  for (double level : levels) {
    out.polylines.push_back(contour_level(grid, level));
  }
  return out;
}

namespace {

// Twice the signed area in (lon, lat) coordinates; positive => counterclockwise.
double ring_signed_area2(const std::vector<Vertex>& vertices) {
  double sum = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const Vertex& a = vertices[i];
    const Vertex& b = vertices[(i + 1) % vertices.size()];
    sum += a[1] * b[0] - b[1] * a[0];
  }
  return sum;
}

}  // namespace

std::string to_geojson(const ContourSet& contours) {
  nlohmann::ordered_json doc;
  doc["type"] = "FeatureCollection";
  doc["features"] = nlohmann::ordered_json::array();

  for (std::size_t li = 0; li < contours.levels.size(); ++li) {
    for (const Polyline& line : contours.polylines[li]) {
      nlohmann::ordered_json feature;
      feature["type"] = "Feature";
      feature["properties"] = {{"band", contours.band_label}, {"level", contours.levels[li]}};

      auto coords = nlohmann::ordered_json::array();
      if (line.closed) {
        std::vector<Vertex> ring = line.vertices;
        if (ring_signed_area2(ring) < 0.0) {  // exterior rings counterclockwise
          std::reverse(ring.begin() + 1, ring.end());
        }
        for (const Vertex& v : ring) {
          coords.push_back({v[1], v[0]});
        }
        coords.push_back({ring.front()[1], ring.front()[0]});
        feature["geometry"] = {{"type", "Polygon"},
                               {"coordinates", nlohmann::ordered_json::array({coords})}};
      } else {
        for (const Vertex& v : line.vertices) {
          coords.push_back({v[1], v[0]});
        }
        feature["geometry"] = {{"type", "LineString"}, {"coordinates", coords}};
      }
      doc["features"].push_back(std::move(feature));
    }
  }
  return doc.dump(2) + "\n";
}

std::string grid_to_csv(const IntensityGrid& grid) {
  validate(grid.spec);
  std::string out = "lat,lon,intensity\n";
  char buf[96];
  for (int row = 0; row < grid.spec.ny; ++row) {
    for (int col = 0; col < grid.spec.nx; ++col) {
      if (grid.valid_at(row, col)) {
        std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.4f\n", grid.lat_at(row), grid.lon_at(col),
                      grid.value_at(row, col));
      } else {
        std::snprintf(buf, sizeof(buf), "%.6f,%.6f,\n", grid.lat_at(row), grid.lon_at(col));
      }
      out += buf;
    }
  }
  return out;
}

}  // namespace idmap
