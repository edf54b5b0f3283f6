#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "idmap/spectral.hpp"

namespace idmap {

enum class AccelUnits { MetersPerSecond2, CentimetersPerSecond2, StandardGravity };

AccelUnits accel_units_from_string(const std::string& s);  // "m/s2" | "cm/s2" | "g"
std::string to_string(AccelUnits units);
double to_m_per_s2(AccelUnits units);  // multiplicative factor

struct StationMeta {
  std::string code;
  std::string name;
  double latitude = 0.0;   // degrees, [-90, 90]
  double longitude = 0.0;  // degrees, [-180, 180]
};

void validate(const StationMeta& station);

struct EventMeta {
  std::string id;
  std::string date;  // ISO-8601 calendar date, YYYY-MM-DD
  double moment_magnitude = 0.0;  // in (0, 10)
  double focal_depth_km = 0.0;    // > 0
  std::optional<std::array<double, 2>> epicenter;  // {lat, lon}
};

void validate(const EventMeta& event);

/// One event's multi-station record bundle. Every record resolves to a
/// station; stations may lack records ("no data"). Components of one station
/// are ordered H1, H2, V.
struct EventDataset {
  EventMeta event;
  std::vector<StationMeta> stations;  // in table order, codes unique
  std::map<std::string, std::vector<Accelerogram>> records;

  const StationMeta* find_station(const std::string& code) const;
  std::vector<std::string> stations_without_records() const;
};

/// Parses a plain-text record: `key=value` header lines (station, component,
/// dt, units required), then one sample per line; `#` starts a comment.
/// Samples are converted to m/s^2. `declared_units`, when given, overrides
/// the header's units declaration.
Accelerogram load_accelerogram(const std::filesystem::path& path,
                               std::optional<AccelUnits> declared_units = std::nullopt);

/// Writes the record in the same format, units m/s2, full precision
/// (load_accelerogram reproduces the samples bit-exactly).
void write_accelerogram(const std::filesystem::path& path, const Accelerogram& acc);

/// stations.csv: header `code,name,lat,lon`, RFC-4180 quoting.
std::vector<StationMeta> load_station_table(const std::filesystem::path& path);

/// event.json: {id, date, mw, depth_km, epicenter: {lat, lon}?}.
EventMeta load_event_meta(const std::filesystem::path& path);

/// Loads `dir`/event.json, `dir`/stations.csv and every file under
/// `dir`/records (lexicographic order). Records referencing unknown stations
/// and duplicate (station, component) pairs are fatal.
EventDataset load_event_dataset(const std::filesystem::path& dir);

}  // namespace idmap
