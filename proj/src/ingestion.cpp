#include "idmap/ingestion.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "idmap/errors.hpp"

namespace idmap {

namespace {

constexpr double kStandardGravity = 9.80665;  // m/s^2

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Strict full-consumption double parse; rejects nan/inf tokens.
bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* begin = t.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end != begin + t.size() || errno == ERANGE || !std::isfinite(v)) return false;
  out = v;
  return true;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError(path.string() + ": cannot open file");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// RFC-4180 reader: quoted fields may contain commas, escaped quotes ("") and
// newlines. Returns rows of raw fields, without the header stripped.
std::vector<std::vector<std::string>> parse_csv(const std::string& text,
                                                const std::string& path_for_errors) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;

  auto end_field = [&] {
    row.push_back(field);
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    if (row.size() > 1 || !row.front().empty()) {
      rows.push_back(row);
    }
    row.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started && field.empty()) {
          quoted = true;
          field_started = true;
        } else {
          throw ParseError(path_for_errors, line, "unexpected quote inside unquoted field");
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        ++line;
        break;
      default:
        field += c;
        field_started = true;
        break;
    }
  }
  if (quoted) {
    throw ParseError(path_for_errors, line, "unterminated quoted field");
  }
  if (field_started || !field.empty() || !row.empty()) {
    end_row();
  }
  return rows;
}

}  // namespace

AccelUnits accel_units_from_string(const std::string& s) {
  if (s == "m/s2") return AccelUnits::MetersPerSecond2;
  if (s == "cm/s2") return AccelUnits::CentimetersPerSecond2;
  if (s == "g") return AccelUnits::StandardGravity;
  throw ValidationError("units: expected m/s2, cm/s2 or g, got '" + s + "'");
}

std::string to_string(AccelUnits units) {
  switch (units) {
    case AccelUnits::MetersPerSecond2: return "m/s2";
    case AccelUnits::CentimetersPerSecond2: return "cm/s2";
    case AccelUnits::StandardGravity: return "g";
  }
  return "m/s2";
}

double to_m_per_s2(AccelUnits units) {
  switch (units) {
    case AccelUnits::MetersPerSecond2: return 1.0;
    case AccelUnits::CentimetersPerSecond2: return 0.01;
    case AccelUnits::StandardGravity: return kStandardGravity;
  }
  return 1.0;
}

void validate(const StationMeta& station) {
  if (station.code.empty()) {
    throw ValidationError("station: code must be non-empty");
  }
  if (!(station.latitude >= -90.0 && station.latitude <= 90.0)) {
    throw ValidationError("station " + station.code + ": latitude out of [-90, 90]");
  }
  if (!(station.longitude >= -180.0 && station.longitude <= 180.0)) {
    throw ValidationError("station " + station.code + ": longitude out of [-180, 180]");
  }
}

void validate(const EventMeta& event) {
  if (event.id.empty()) {
    throw ValidationError("event: id must be non-empty");
  }
  if (!(event.moment_magnitude > 0.0 && event.moment_magnitude < 10.0)) {
    throw ValidationError("event " + event.id + ": mw out of (0, 10)");
  }
  if (!(event.focal_depth_km > 0.0)) {
    throw ValidationError("event " + event.id + ": depth_km must be > 0");
  }
  // calendar date, YYYY-MM-DD
  if (event.date.size() != 10 || event.date[4] != '-' || event.date[7] != '-' ||
      !std::all_of(event.date.begin(), event.date.end(),
                   [](char c) { return c == '-' || std::isdigit(static_cast<unsigned char>(c)); })) {
    throw ValidationError("event " + event.id + ": date must be ISO-8601 YYYY-MM-DD");
  }
  if (event.epicenter) {
    const auto& [lat, lon] = *event.epicenter;
    if (!(lat >= -90.0 && lat <= 90.0) || !(lon >= -180.0 && lon <= 180.0)) {
      throw ValidationError("event " + event.id + ": epicenter out of range");
    }
  }
}

const StationMeta* EventDataset::find_station(const std::string& code) const {
  for (const StationMeta& s : stations) {
    if (s.code == code) return &s;
  }
  return nullptr;
}

std::vector<std::string> EventDataset::stations_without_records() const {
  std::vector<std::string> out;
  for (const StationMeta& s : stations) {
    if (records.find(s.code) == records.end()) {
      out.push_back(s.code);
    }
  }
  return out;
}

Accelerogram load_accelerogram(const std::filesystem::path& path,
                               std::optional<AccelUnits> declared_units) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError(path.string() + ": cannot open file");
  }

  Accelerogram acc;
  std::optional<AccelUnits> units = declared_units;
  bool have_dt = false;
  bool have_station = false;
  bool have_component = false;
  bool in_header = true;
  std::set<std::string> seen_keys;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (const std::size_t hash = raw.find('#'); hash != std::string::npos) {
      raw.erase(hash);
    }
    const std::string line = trim(raw);
    if (line.empty()) continue;

    const std::size_t eq = line.find('=');
    if (in_header && eq != std::string::npos) {
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) {
        throw ParseError(path.string(), line_no, "empty header key");
      }
      if (!seen_keys.insert(key).second) {
        throw ParseError(path.string(), line_no, "duplicate header key '" + key + "'");
      }
      if (key == "station") {
        acc.station_code = value;
        have_station = !value.empty();
      } else if (key == "component") {
        if (value != "H1" && value != "H2" && value != "V") {
          throw ParseError(path.string(), line_no, "component must be H1, H2 or V, got '" + value + "'");
        }
        acc.component = component_from_string(value);
        have_component = true;
      } else if (key == "dt") {
        double dt = 0.0;
        if (!parse_double(value, dt) || !(dt > 0.0)) {
          throw ParseError(path.string(), line_no, "dt must be a positive number, got '" + value + "'");
        }
        acc.dt = dt;
        have_dt = true;
      } else if (key == "units") {
        try {
          const AccelUnits parsed = accel_units_from_string(value);
          if (!declared_units) units = parsed;
        } catch (const ValidationError& e) {
          throw ParseError(path.string(), line_no, e.what());
        }
      } else {
        acc.metadata.emplace_back(key, value);
      }
      continue;
    }

    in_header = false;
    double sample = 0.0;
    if (!parse_double(line, sample)) {
      throw ParseError(path.string(), line_no, "expected a numeric sample, got '" + line + "'");
    }
    acc.samples.push_back(sample);
  }

  if (!have_station) throw ParseError(path.string() + ": missing header key 'station'");
  if (!have_component) throw ParseError(path.string() + ": missing header key 'component'");
  if (!have_dt) throw ParseError(path.string() + ": missing header key 'dt'");
  if (!units) throw ParseError(path.string() + ": missing header key 'units'");
  if (acc.samples.size() < 2) {
    throw ParseError(path.string() + ": record must hold at least 2 samples");
  }

  const double factor = to_m_per_s2(*units);
  if (factor != 1.0) {
    for (double& s : acc.samples) s *= factor;
  }
  validate(acc);
  return acc;
}

void write_accelerogram(const std::filesystem::path& path, const Accelerogram& acc) {
  validate(acc);
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  char buf[64];
  out << "station=" << acc.station_code << "\n";
  out << "component=" << to_string(acc.component) << "\n";
  std::snprintf(buf, sizeof(buf), "%.17g", acc.dt);
  out << "dt=" << buf << "\n";
  out << "units=m/s2\n";
  for (const auto& [key, value] : acc.metadata) {
    out << key << "=" << value << "\n";
  }
  for (double s : acc.samples) {
    std::snprintf(buf, sizeof(buf), "%.17g", s);
    out << buf << "\n";
  }
  if (!out) {
    throw Error("write failed for " + path.string());
  }
}

std::vector<StationMeta> load_station_table(const std::filesystem::path& path) {
  const auto rows = parse_csv(read_file(path), path.string());
  if (rows.empty()) {
    throw ParseError(path.string() + ": empty station table");
  }
  const std::vector<std::string> expected = {"code", "name", "lat", "lon"};
  if (rows.front().size() != 4 ||
      !std::equal(expected.begin(), expected.end(), rows.front().begin(),
                  [](const std::string& a, const std::string& b) { return a == trim(b); })) {
    throw ParseError(path.string(), 1, "header must be 'code,name,lat,lon'");
  }

  std::vector<StationMeta> stations;
  std::set<std::string> codes;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != 4) {
      throw ParseError(path.string(), r + 1, "expected 4 fields, got " + std::to_string(row.size()));
    }
    StationMeta s;
    s.code = trim(row[0]);
    s.name = row[1];
    if (!parse_double(row[2], s.latitude)) {
      throw ParseError(path.string(), r + 1, "lat is not a number: '" + row[2] + "'");
    }
    if (!parse_double(row[3], s.longitude)) {
      throw ParseError(path.string(), r + 1, "lon is not a number: '" + row[3] + "'");
    }
    try {
      validate(s);
    } catch (const ValidationError& e) {
      throw ParseError(path.string(), r + 1, e.what());
    }
    if (!codes.insert(s.code).second) {
      throw ParseError(path.string(), r + 1, "duplicate station code '" + s.code + "'");
    }
    stations.push_back(std::move(s));
  }
  return stations;
}

EventMeta load_event_meta(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }

  EventMeta event;
  try {
    event.id = doc.at("id").get<std::string>();
    event.date = doc.at("date").get<std::string>();
    event.moment_magnitude = doc.at("mw").get<double>();
    event.focal_depth_km = doc.at("depth_km").get<double>();
    if (doc.contains("epicenter") && !doc["epicenter"].is_null()) {
      event.epicenter = std::array<double, 2>{doc["epicenter"].at("lat").get<double>(),
                                              doc["epicenter"].at("lon").get<double>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  try {
    validate(event);
  } catch (const ValidationError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return event;
}

EventDataset load_event_dataset(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ParseError(dir.string() + ": not a directory");
  }
  EventDataset dataset;
  dataset.event = load_event_meta(dir / "event.json");
  dataset.stations = load_station_table(dir / "stations.csv");

  const std::filesystem::path records_dir = dir / "records";
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(records_dir)) {
    for (const auto& entry : std::filesystem::directory_iterator(records_dir)) {
      if (entry.is_regular_file() && entry.path().filename().string().front() != '.') {
        files.push_back(entry.path());
      }
    }
  }
  std::sort(files.begin(), files.end());  // directory order must not matter

  for (const auto& file : files) {
    Accelerogram acc = load_accelerogram(file);
    if (!dataset.find_station(acc.station_code)) {
      throw ValidationError(file.string() + ": record references unknown station '" +
                            acc.station_code + "'");
    }
    auto& list = dataset.records[acc.station_code];
    for (const Accelerogram& existing : list) {
      if (existing.component == acc.component) {
        throw ValidationError(file.string() + ": duplicate component " + to_string(acc.component) +
                              " for station '" + acc.station_code + "'");
      }
    }
    list.push_back(std::move(acc));
  }
  for (auto& [code, list] : dataset.records) {
    std::sort(list.begin(), list.end(), [](const Accelerogram& a, const Accelerogram& b) {
      return static_cast<int>(a.component) < static_cast<int>(b.component);
    });
  }
  return dataset;
}

}  // namespace idmap
