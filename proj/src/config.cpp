#include "idmap/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "idmap/errors.hpp"

namespace idmap {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double_or_throw(const std::string& key, const std::string& value) {
  const std::string t = trim(value);
  const char* begin = t.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (t.empty() || end != begin + t.size() || errno == ERANGE || !std::isfinite(v)) {
    throw ValidationError("config: " + key + " must be a number, got '" + value + "'");
  }
  return v;
}

int parse_int_or_throw(const std::string& key, const std::string& value) {
  const double v = parse_double_or_throw(key, value);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) {
    throw ValidationError("config: " + key + " must be an integer, got '" + value + "'");
  }
  return i;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(s.substr(start));
      break;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

}  // namespace

RunConfig::RunConfig() : contour_levels(parse_contour_levels("5.0:0.5:9.0")) {}

IntensityModel RunConfig::intensity_model() const {
  IntensityModel model;
  model.pointwise_log_base = pointwise_log_base;
  model.pointwise_offset = pointwise_offset;
  model.band_log_base = band_log_base;
  model.band_offset = band_offset;
  model.damping_ratio = damping_ratio;
  return model;
}

void RunConfig::validate() const {
  idmap::validate(intensity_model());
  if (grid_points_per_band < 2) {
    throw ValidationError("config: grid_points_per_band must be >= 2");
  }
  if (!(idw_power > 0.0) || !std::isfinite(idw_power)) {
    throw ValidationError("config: idw_power must be > 0");
  }
  if (grid_nx < 2 || grid_ny < 2) {
    throw ValidationError("config: grid_nx and grid_ny must be >= 2");
  }
  if (contour_levels.empty()) {
    throw ValidationError("config: contour_levels must not be empty");
  }
  for (std::size_t i = 0; i < contour_levels.size(); ++i) {
    if (!std::isfinite(contour_levels[i]) ||
        (i > 0 && !(contour_levels[i] > contour_levels[i - 1]))) {
      throw ValidationError("config: contour_levels must be finite and strictly increasing");
    }
  }
  if (max_distance_mask_km && !(*max_distance_mask_km > 0.0)) {
    throw ValidationError("config: max_distance_mask_km must be > 0");
  }
}

std::vector<double> parse_contour_levels(const std::string& text) {
  const std::string t = trim(text);
  std::vector<double> levels;
  if (t.find(':') != std::string::npos) {
    const auto parts = split(t, ':');
    if (parts.size() != 3) {
      throw ValidationError("config: contour_levels range must be start:step:stop, got '" + text + "'");
    }
    const double start = parse_double_or_throw("contour_levels", parts[0]);
    const double step = parse_double_or_throw("contour_levels", parts[1]);
    const double stop = parse_double_or_throw("contour_levels", parts[2]);
    if (!(step > 0.0) || stop < start) {
      throw ValidationError("config: contour_levels range requires step > 0 and stop >= start");
    }
    const double slack = 1e-9 * std::max(1.0, std::abs(stop));
    for (int k = 0;; ++k) {
      const double level = start + k * step;
      if (level > stop + slack) break;
      levels.push_back(level);
    }
  } else {
    for (const std::string& part : split(t, ',')) {
      levels.push_back(parse_double_or_throw("contour_levels", part));
    }
    for (std::size_t i = 1; i < levels.size(); ++i) {
      if (!(levels[i] > levels[i - 1])) {
        throw ValidationError("config: contour_levels must be strictly increasing");
      }
    }
  }
  if (levels.empty()) {
    throw ValidationError("config: contour_levels is empty");
  }
  return levels;
}

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "damping_ratio") {
    cfg.damping_ratio = parse_double_or_throw(key, value);
  } else if (key == "pointwise_log_base") {
    cfg.pointwise_log_base = parse_double_or_throw(key, value);
  } else if (key == "pointwise_offset") {
    cfg.pointwise_offset = parse_double_or_throw(key, value);
  } else if (key == "band_log_base") {
    cfg.band_log_base = parse_double_or_throw(key, value);
  } else if (key == "band_offset") {
    cfg.band_offset = parse_double_or_throw(key, value);
  } else if (key == "grid_points_per_band") {
    cfg.grid_points_per_band = parse_int_or_throw(key, value);
  } else if (key == "idw_power") {
    cfg.idw_power = parse_double_or_throw(key, value);
  } else if (key == "grid_nx") {
    cfg.grid_nx = parse_int_or_throw(key, value);
  } else if (key == "grid_ny") {
    cfg.grid_ny = parse_int_or_throw(key, value);
  } else if (key == "contour_levels") {
    cfg.contour_levels = parse_contour_levels(value);
  } else if (key == "max_distance_mask_km") {
    const std::string t = trim(value);
    if (t.empty() || t == "none") {
      cfg.max_distance_mask_km.reset();
    } else {
      cfg.max_distance_mask_km = parse_double_or_throw(key, value);
    }
  } else {
    throw ValidationError("config: unknown key '" + key + "'");
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError(path.string() + ": cannot open config file");
  }
  RunConfig cfg;
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
    if (eq == std::string::npos) {
      throw ParseError(path.string(), line_no, "expected 'key = value'");
    }
    try {
      apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ValidationError& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
  }
  cfg.validate();
  return cfg;
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> entries;
  entries.emplace_back("damping_ratio", format_double(cfg.damping_ratio));
  entries.emplace_back("pointwise_log_base", format_double(cfg.pointwise_log_base));
  entries.emplace_back("pointwise_offset", format_double(cfg.pointwise_offset));
  entries.emplace_back("band_log_base", format_double(cfg.band_log_base));
  entries.emplace_back("band_offset", format_double(cfg.band_offset));
  entries.emplace_back("grid_points_per_band", std::to_string(cfg.grid_points_per_band));
  entries.emplace_back("idw_power", format_double(cfg.idw_power));
  entries.emplace_back("grid_nx", std::to_string(cfg.grid_nx));
  entries.emplace_back("grid_ny", std::to_string(cfg.grid_ny));
  std::string levels;
  for (double level : cfg.contour_levels) {
    levels += levels.empty() ? format_double(level) : "," + format_double(level);
  }
  entries.emplace_back("contour_levels", levels);
  entries.emplace_back("max_distance_mask_km",
                       cfg.max_distance_mask_km ? format_double(*cfg.max_distance_mask_km) : "none");
  return entries;
}

}  // namespace idmap
