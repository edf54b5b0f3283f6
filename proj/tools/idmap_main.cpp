// idmap: frequency-band instrumental seismic intensity toolkit.
// Subcommands: bands | spectrum | intensity | map.
// Exit codes: 0 success, 1 usage, 2 data/validation, 3 internal.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "idmap/config.hpp"
#include "idmap/errors.hpp"
#include "idmap/ingestion.hpp"
#include "idmap/intensity.hpp"
#include "idmap/mapping.hpp"
#include "idmap/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct ConfigOverrides {
  std::optional<double> damping_ratio;
  std::optional<double> pointwise_log_base;
  std::optional<double> pointwise_offset;
  std::optional<double> band_log_base;
  std::optional<double> band_offset;
  std::optional<int> grid_points_per_band;
  std::optional<double> idw_power;
  std::optional<int> grid_nx;
  std::optional<int> grid_ny;
  std::optional<std::string> contour_levels;
  std::optional<double> max_distance_mask_km;

  void apply(idmap::RunConfig& cfg) const {
    if (damping_ratio) cfg.damping_ratio = *damping_ratio;
    if (pointwise_log_base) cfg.pointwise_log_base = *pointwise_log_base;
    if (pointwise_offset) cfg.pointwise_offset = *pointwise_offset;
    if (band_log_base) cfg.band_log_base = *band_log_base;
    if (band_offset) cfg.band_offset = *band_offset;
    if (grid_points_per_band) cfg.grid_points_per_band = *grid_points_per_band;
    if (idw_power) cfg.idw_power = *idw_power;
    if (grid_nx) cfg.grid_nx = *grid_nx;
    if (grid_ny) cfg.grid_ny = *grid_ny;
    if (contour_levels) cfg.contour_levels = idmap::parse_contour_levels(*contour_levels);
    if (max_distance_mask_km) cfg.max_distance_mask_km = *max_distance_mask_km;
  }
};

void add_config_flags(CLI::App* cmd, ConfigOverrides& ov) {
  cmd->add_option("--damping-ratio", ov.damping_ratio, "Oscillator damping ratio");
  cmd->add_option("--pointwise-log-base", ov.pointwise_log_base, "Pointwise intensity log base");
  cmd->add_option("--pointwise-offset", ov.pointwise_offset, "Pointwise intensity offset");
  cmd->add_option("--band-log-base", ov.band_log_base, "Band intensity log base");
  cmd->add_option("--band-offset", ov.band_offset, "Band intensity offset");
  cmd->add_option("--grid-points-per-band", ov.grid_points_per_band,
                  "Frequency grid points per band");
  cmd->add_option("--idw-power", ov.idw_power, "Inverse-distance weighting power");
  cmd->add_option("--grid-nx", ov.grid_nx, "Map grid nodes west-to-east");
  cmd->add_option("--grid-ny", ov.grid_ny, "Map grid nodes south-to-north");
  cmd->add_option("--contour-levels", ov.contour_levels,
                  "Contour levels, start:step:stop or comma list");
  cmd->add_option("--max-distance-mask-km", ov.max_distance_mask_km,
                  "Mask grid nodes farther than this from every station");
}

// Prints the first few diagnostics verbatim and summarizes the rest; a
// coarse record can trip the aliasing warning on hundreds of grid
// frequencies.
class WarningCollator {
 public:
  idmap::WarningSink sink() {
    return [this](const std::string& message) {
      if (++count_ <= 3) {
        std::cerr << "warning: " << message << "\n";
      }
    };
  }
  ~WarningCollator() {
    if (count_ > 3) {
      std::cerr << "warning: (" << count_ - 3 << " similar warnings suppressed)\n";
    }
  }

 private:
  std::size_t count_ = 0;
};

std::string format_fixed(double v, int decimals) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

double round_decimals(double v, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(v * scale) / scale;
}

std::uint64_t fnv1a64_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw idmap::Error("cannot open " + path.string() + " for checksumming");
  }
  std::uint64_t hash = 14695981039346656037ULL;
  char buf[8192];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 1099511628211ULL;
    }
  }
  return hash;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw idmap::Error("cannot write " + path.string());
  }
  out << text;
  if (!out) {
    throw idmap::Error("write failed for " + path.string());
  }
}

ordered_json config_json(const idmap::RunConfig& cfg) {
  ordered_json j;
  j["damping_ratio"] = cfg.damping_ratio;
  j["pointwise_log_base"] = cfg.pointwise_log_base;
  j["pointwise_offset"] = cfg.pointwise_offset;
  j["band_log_base"] = cfg.band_log_base;
  j["band_offset"] = cfg.band_offset;
  j["grid_points_per_band"] = cfg.grid_points_per_band;
  j["idw_power"] = cfg.idw_power;
  j["grid_nx"] = cfg.grid_nx;
  j["grid_ny"] = cfg.grid_ny;
  j["contour_levels"] = cfg.contour_levels;
  if (cfg.max_distance_mask_km) {
    j["max_distance_mask_km"] = *cfg.max_distance_mask_km;
  } else {
    j["max_distance_mask_km"] = nullptr;
  }
  return j;
}

void write_manifest(const fs::path& manifest_path, const std::string& command,
                    const idmap::RunConfig& cfg, const std::vector<fs::path>& inputs,
                    const std::vector<std::string>& outputs) {
  ordered_json doc;
  doc["command"] = command;
  doc["config"] = config_json(cfg);
  doc["inputs"] = ordered_json::array();
  for (const fs::path& input : inputs) {
    doc["inputs"].push_back({{"path", input.string()}, {"fnv1a64", hex64(fnv1a64_file(input))}});
  }
  doc["outputs"] = outputs;
  write_text_file(manifest_path, doc.dump(2) + "\n");
}

/// Dataset files in deterministic order, for the manifest.
std::vector<fs::path> dataset_input_files(const fs::path& dir) {
  std::vector<fs::path> inputs = {dir / "event.json", dir / "stations.csv"};
  const fs::path records = dir / "records";
  std::vector<fs::path> record_files;
  if (fs::is_directory(records)) {
    for (const auto& entry : fs::directory_iterator(records)) {
      if (entry.is_regular_file() && entry.path().filename().string().front() != '.') {
        record_files.push_back(entry.path());
      }
    }
  }
  std::sort(record_files.begin(), record_files.end());
  inputs.insert(inputs.end(), record_files.begin(), record_files.end());
  return inputs;
}

// ---------------------------------------------------------------------------
// bands

int cmd_bands(bool as_json) {
  const auto& bands = idmap::band_table();
  if (as_json) {
    ordered_json doc = ordered_json::array();
    for (const auto& b : bands) {
      doc.push_back({{"index", b.index},
                     {"label", b.label},
                     {"f_low_hz", b.f_low_hz},
                     {"f_high_hz", b.f_high_hz},
                     {"t_low_s", b.t_low_s},
                     {"t_high_s", b.t_high_s}});
    }
    std::cout << doc.dump(2) << "\n";
    return kExitOk;
  }
  std::printf("%5s  %-7s  %9s  %9s  %7s  %7s\n", "index", "label", "f_low_hz", "f_high_hz",
              "t_low_s", "t_high_s");
  for (const auto& b : bands) {
    std::printf("%5d  %-7s  %9.5f  %9.5f  %7.2f  %7.2f\n", b.index, b.label.c_str(), b.f_low_hz,
                b.f_high_hz, b.t_low_s, b.t_high_s);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// spectrum

int cmd_spectrum(const fs::path& record_path, const fs::path& output,
                 const std::optional<fs::path>& manifest, const idmap::RunConfig& cfg) {
  const idmap::Accelerogram acc = idmap::load_accelerogram(record_path);
  const std::vector<double> grid = idmap::composite_frequency_grid(cfg.grid_points_per_band);
  WarningCollator warnings;
  const idmap::EisSpectrum spectrum =
      idmap::eis_spectrum(acc, grid, cfg.damping_ratio, warnings.sink());
  const idmap::IntensityModel model = cfg.intensity_model();

  std::string csv = "frequency_hz,eis,intensity\n";
  char buf[96];
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double eis = spectrum.eis_values[i];
    if (eis > 0.0) {
      std::snprintf(buf, sizeof(buf), "%.8g,%.9e,%.4f\n", grid[i], eis,
                    idmap::pointwise_intensity(eis, model));
    } else {
      std::snprintf(buf, sizeof(buf), "%.8g,%.9e,\n", grid[i], eis);
    }
    csv += buf;
  }

  std::vector<std::string> outputs;
  if (output.empty()) {
    std::cout << csv;
  } else {
    write_text_file(output, csv);
    outputs.push_back(output.filename().string());
    std::cout << "spectrum: " << grid.size() << " frequencies -> " << output.string() << "\n";
  }
  if (manifest || !output.empty()) {
    const fs::path manifest_path =
        manifest ? *manifest
                 : (output.has_parent_path() ? output.parent_path() / "run.json"
                                             : fs::path("run.json"));
    write_manifest(manifest_path, "spectrum", cfg, {record_path}, outputs);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// intensity

struct StationIntensities {
  const idmap::StationMeta* station = nullptr;
  // one entry per canonical band; unset => quiescent
  std::array<std::optional<idmap::BandIntensityResult>, 12> bands;
};

std::vector<StationIntensities> compute_station_intensities(const idmap::EventDataset& dataset,
                                                            const idmap::RunConfig& cfg) {
  const idmap::IntensityModel model = cfg.intensity_model();
  WarningCollator warnings;
  const idmap::WarningSink warn = warnings.sink();
  std::vector<StationIntensities> result;

  std::vector<std::string> codes;
  for (const auto& [code, records] : dataset.records) {
    codes.push_back(code);
  }
  std::sort(codes.begin(), codes.end());

  for (const std::string& code : codes) {
    const auto& records = dataset.records.at(code);
    const bool has_horizontal =
        std::any_of(records.begin(), records.end(), [](const idmap::Accelerogram& r) {
          return r.component == idmap::Component::H1 || r.component == idmap::Component::H2 ||
                 r.component == idmap::Component::Unspecified;
        });
    if (!has_horizontal) {
      continue;
    }
    StationIntensities si;
    si.station = dataset.find_station(code);
    for (const auto& band : idmap::band_table()) {
      try {
        si.bands[band.index - 1] = idmap::station_band_intensity(
            records, band, model, cfg.grid_points_per_band, false, warn);
      } catch (const idmap::QuiescentError&) {
        // reported as null
      }
    }
    result.push_back(si);
  }
  return result;
}

ordered_json intensity_report_json(const idmap::EventDataset& dataset,
                                   const std::vector<StationIntensities>& stations) {
  ordered_json doc;
  doc["event"] = {{"id", dataset.event.id},
                  {"date", dataset.event.date},
                  {"mw", dataset.event.moment_magnitude},
                  {"depth_km", dataset.event.focal_depth_km}};
  if (dataset.event.epicenter) {
    doc["event"]["epicenter"] = {{"lat", (*dataset.event.epicenter)[0]},
                                 {"lon", (*dataset.event.epicenter)[1]}};
  }
  doc["stations"] = ordered_json::array();
  for (const auto& si : stations) {
    ordered_json entry;
    entry["code"] = si.station->code;
    entry["lat"] = si.station->latitude;
    entry["lon"] = si.station->longitude;
    ordered_json bands;
    ordered_json components;
    for (const auto& band : idmap::band_table()) {
      const auto& cell = si.bands[band.index - 1];
      if (cell) {
        bands[band.label] = round_decimals(cell->intensity, 2);
        components[band.label] = idmap::to_string(cell->component_used);
      } else {
        bands[band.label] = nullptr;
        components[band.label] = nullptr;
      }
    }
    entry["bands"] = std::move(bands);
    entry["component_used"] = std::move(components);
    doc["stations"].push_back(std::move(entry));
  }
  return doc;
}

int cmd_intensity(const fs::path& dataset_dir, bool as_json, const fs::path& output,
                  const std::optional<fs::path>& manifest, const idmap::RunConfig& cfg) {
  const idmap::EventDataset dataset = idmap::load_event_dataset(dataset_dir);
  if (dataset.records.empty()) {
    throw idmap::ValidationError("no records found under " + (dataset_dir / "records").string());
  }
  const auto stations = compute_station_intensities(dataset, cfg);
  if (stations.empty()) {
    throw idmap::ValidationError("no station with horizontal records in " + dataset_dir.string());
  }

  const ordered_json doc = intensity_report_json(dataset, stations);
  const std::string json_text = doc.dump(2) + "\n";

  if (as_json) {
    std::cout << json_text;
  } else {
    std::printf("event %s  Mw %.2f  depth %.1f km\n", dataset.event.id.c_str(),
                dataset.event.moment_magnitude, dataset.event.focal_depth_km);
    std::printf("%-8s %9s %9s", "station", "lat", "lon");
    for (const auto& band : idmap::band_table()) {
      std::printf(" %7s", band.label.c_str());
    }
    std::printf("\n");
    for (const auto& si : stations) {
      std::printf("%-8s %9.4f %9.4f", si.station->code.c_str(), si.station->latitude,
                  si.station->longitude);
      for (const auto& band : idmap::band_table()) {
        const auto& cell = si.bands[band.index - 1];
        if (cell) {
          std::printf(" %7s", format_fixed(cell->intensity, 2).c_str());
        } else {
          std::printf(" %7s", "-");
        }
      }
      std::printf("\n");
    }
    const auto missing = dataset.stations_without_records();
    if (!missing.empty()) {
      std::printf("# %zu station(s) with no data:", missing.size());
      for (const auto& code : missing) std::printf(" %s", code.c_str());
      std::printf("\n");
    }
  }

  std::vector<std::string> outputs;
  if (!output.empty()) {
    write_text_file(output, json_text);
    outputs.push_back(output.filename().string());
  }
  if (manifest || !output.empty()) {
    const fs::path manifest_path =
        manifest ? *manifest
                 : (output.has_parent_path() ? output.parent_path() / "run.json"
                                             : fs::path("run.json"));
    write_manifest(manifest_path, "intensity", cfg, dataset_input_files(dataset_dir), outputs);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// map

struct BBox {
  std::optional<double> lat_min, lat_max, lon_min, lon_max;
};

idmap::GridSpec grid_spec_for(const std::vector<idmap::IntensityObservation>& observations,
                              const BBox& bbox, const idmap::RunConfig& cfg) {
  idmap::GridSpec spec;
  double lat_lo = 1e300, lat_hi = -1e300, lon_lo = 1e300, lon_hi = -1e300;
  for (const auto& obs : observations) {
    lat_lo = std::min(lat_lo, obs.latitude);
    lat_hi = std::max(lat_hi, obs.latitude);
    lon_lo = std::min(lon_lo, obs.longitude);
    lon_hi = std::max(lon_hi, obs.longitude);
  }
  // pad the station bbox by 10% of its span, at least half a degree
  const double lat_pad = std::max(0.5, 0.1 * (lat_hi - lat_lo));
  const double lon_pad = std::max(0.5, 0.1 * (lon_hi - lon_lo));
  spec.lat_min = bbox.lat_min.value_or(lat_lo - lat_pad);
  spec.lat_max = bbox.lat_max.value_or(lat_hi + lat_pad);
  spec.lon_min = bbox.lon_min.value_or(lon_lo - lon_pad);
  spec.lon_max = bbox.lon_max.value_or(lon_hi + lon_pad);
  spec.nx = cfg.grid_nx;
  spec.ny = cfg.grid_ny;
  return spec;
}

int cmd_map(const fs::path& dataset_dir, const std::string& band_label, const fs::path& out_dir,
            fs::path grid_csv_path, fs::path geojson_path, const BBox& bbox,
            const std::optional<fs::path>& manifest, const idmap::RunConfig& cfg) {
  const idmap::BandDefinition& band = idmap::band_by_label(band_label);
  const idmap::EventDataset dataset = idmap::load_event_dataset(dataset_dir);
  if (dataset.records.empty()) {
    throw idmap::ValidationError("no records found under " + (dataset_dir / "records").string());
  }

  const idmap::IntensityModel model = cfg.intensity_model();
  WarningCollator warnings;
  const idmap::WarningSink warn = warnings.sink();
  std::vector<idmap::IntensityObservation> observations;
  std::vector<std::string> codes;
  for (const auto& [code, records] : dataset.records) codes.push_back(code);
  std::sort(codes.begin(), codes.end());

  for (const std::string& code : codes) {
    const idmap::StationMeta* station = dataset.find_station(code);
    try {
      const auto result = idmap::station_band_intensity(dataset.records.at(code), band, model,
                                                        cfg.grid_points_per_band, false, warn);
      observations.push_back({code, station->latitude, station->longitude, band.label,
                              result.intensity});
    } catch (const idmap::QuiescentError&) {
      std::cerr << "warning: station " << code << " is quiescent in " << band.label
                << "; skipped\n";
    } catch (const idmap::ValidationError& e) {
      std::cerr << "warning: station " << code << " skipped: " << e.what() << "\n";
    }
  }
  if (observations.empty()) {
    throw idmap::ValidationError("no usable station intensities for band " + band.label);
  }

  const idmap::GridSpec spec = grid_spec_for(observations, bbox, cfg);
  const idmap::IntensityGrid grid =
      idmap::interpolate_field(observations, spec, cfg.idw_power, cfg.max_distance_mask_km);
  const idmap::ContourSet contours = idmap::extract_contours(grid, cfg.contour_levels);

  if (grid_csv_path.empty()) grid_csv_path = out_dir / ("grid_" + band.label + ".csv");
  if (geojson_path.empty()) geojson_path = out_dir / ("contours_" + band.label + ".geojson");
  write_text_file(grid_csv_path, idmap::grid_to_csv(grid));
  write_text_file(geojson_path, idmap::to_geojson(contours));

  const fs::path manifest_path = manifest ? *manifest : out_dir / "run.json";
  write_manifest(manifest_path, "map", cfg, dataset_input_files(dataset_dir),
                 {grid_csv_path.filename().string(), geojson_path.filename().string()});

  double lo = 1e300, hi = -1e300;
  for (const auto& obs : observations) {
    lo = std::min(lo, obs.intensity);
    hi = std::max(hi, obs.intensity);
  }
  std::size_t contour_count = 0;
  for (const auto& per_level : contours.polylines) contour_count += per_level.size();
  std::printf("map %s: %zu station(s), intensity %.2f..%.2f, grid %dx%d, %zu contour line(s)\n",
              band.label.c_str(), observations.size(), lo, hi, spec.nx, spec.ny, contour_count);
  std::printf("  grid:     %s\n", grid_csv_path.string().c_str());
  std::printf("  contours: %s\n", geojson_path.string().c_str());
  std::printf("  manifest: %s\n", manifest_path.string().c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"idmap: frequency-band instrumental seismic intensity toolkit"};
  app.name("idmap");
  app.require_subcommand(1);

  std::string config_path;
  bool as_json = false;
  app.add_option("--config", config_path, "Flat key = value configuration file")
      ->check(CLI::ExistingFile);
  app.add_flag("--json", as_json, "Machine-readable output where supported");

  ConfigOverrides overrides;

  CLI::App* bands = app.add_subcommand("bands", "Print the twelve averaging bands");
  bands->fallthrough();

  CLI::App* spectrum =
      app.add_subcommand("spectrum", "EIS and pointwise-intensity spectrum of one record");
  spectrum->fallthrough();
  std::string record_arg;
  std::string spectrum_out;
  std::string manifest_arg;
  spectrum->add_option("record", record_arg, "Accelerogram file")->required();
  spectrum->add_option("-o,--output", spectrum_out, "Write the CSV here instead of stdout");
  spectrum->add_option("--manifest", manifest_arg, "Write a run manifest to this path");
  add_config_flags(spectrum, overrides);

  CLI::App* intensity =
      app.add_subcommand("intensity", "Per-station per-band intensity report for a dataset");
  intensity->fallthrough();
  std::string dataset_arg;
  std::string intensity_out;
  intensity->add_option("dataset", dataset_arg, "Dataset directory")->required();
  intensity->add_option("-o,--output", intensity_out, "Also write the JSON report here");
  intensity->add_option("--manifest", manifest_arg, "Write a run manifest to this path");
  add_config_flags(intensity, overrides);

  CLI::App* map_cmd = app.add_subcommand("map", "Intensity grid and contours for one band");
  map_cmd->fallthrough();
  std::string map_dataset_arg;
  std::string band_label;
  std::string out_dir = ".";
  std::string grid_csv_arg;
  std::string geojson_arg;
  BBox bbox;
  map_cmd->add_option("dataset", map_dataset_arg, "Dataset directory")->required();
  map_cmd->add_option("--band", band_label, "Band label, Id121..Id1212")->required();
  map_cmd->add_option("--out-dir", out_dir, "Output directory");
  map_cmd->add_option("--grid-csv", grid_csv_arg, "Grid CSV path");
  map_cmd->add_option("--geojson", geojson_arg, "Contour GeoJSON path");
  map_cmd->add_option("--lat-min", bbox.lat_min, "Grid bbox override");
  map_cmd->add_option("--lat-max", bbox.lat_max, "Grid bbox override");
  map_cmd->add_option("--lon-min", bbox.lon_min, "Grid bbox override");
  map_cmd->add_option("--lon-max", bbox.lon_max, "Grid bbox override");
  map_cmd->add_option("--manifest", manifest_arg, "Run manifest path (default out-dir/run.json)");
  add_config_flags(map_cmd, overrides);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    idmap::RunConfig cfg;
    if (!config_path.empty()) {
      cfg = idmap::load_run_config(config_path);
    }
    overrides.apply(cfg);
    cfg.validate();

    const std::optional<fs::path> manifest =
        manifest_arg.empty() ? std::nullopt : std::optional<fs::path>(manifest_arg);

    if (app.got_subcommand(bands)) {
      return cmd_bands(as_json);
    }
    if (app.got_subcommand(spectrum)) {
      return cmd_spectrum(record_arg, spectrum_out, manifest, cfg);
    }
    if (app.got_subcommand(intensity)) {
      return cmd_intensity(dataset_arg, as_json, intensity_out, manifest, cfg);
    }
    if (app.got_subcommand(map_cmd)) {
      try {
        return cmd_map(map_dataset_arg, band_label, out_dir, grid_csv_arg, geojson_arg, bbox,
                       manifest, cfg);
      } catch (const idmap::ValidationError& e) {
        if (std::string(e.what()).find("unknown band label") != std::string::npos) {
          std::cerr << "error: " << e.what() << "\n";
          return kExitUsage;
        }
        throw;
      }
    }
    std::cerr << "error: no subcommand\n";
    return kExitUsage;
  } catch (const idmap::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
