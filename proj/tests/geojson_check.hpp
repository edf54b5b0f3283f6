#pragma once

// Structural RFC 7946 checks for the GeoJSON the mapper emits: a
// FeatureCollection of Feature objects whose geometries are LineStrings
// (>= 2 positions) or Polygons (rings of >= 4 positions, closed), positions
// ordered [lon, lat] and within geographic range.

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace testutil {

inline std::vector<std::string> geojson_structural_errors(const std::string& text) {
  std::vector<std::string> errors;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    return {std::string("not JSON: ") + e.what()};
  }

  auto check_position = [&](const nlohmann::json& pos, const std::string& where) {
    if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
      errors.push_back(where + ": position must be [lon, lat] numbers");
      return;
    }
    const double lon = pos[0].get<double>();
    const double lat = pos[1].get<double>();
    if (lon < -180.0 || lon > 180.0) errors.push_back(where + ": longitude out of range");
    if (lat < -90.0 || lat > 90.0) errors.push_back(where + ": latitude out of range");
  };

  if (doc.value("type", "") != "FeatureCollection") {
    errors.push_back("root type must be FeatureCollection");
  }
  if (!doc.contains("features") || !doc["features"].is_array()) {
    errors.push_back("features array missing");
    return errors;
  }

  for (std::size_t i = 0; i < doc["features"].size(); ++i) {
    const auto& feature = doc["features"][i];
    const std::string where = "features[" + std::to_string(i) + "]";
    if (feature.value("type", "") != "Feature") {
      errors.push_back(where + ": type must be Feature");
    }
    if (!feature.contains("properties") || !feature["properties"].is_object() ||
        !feature["properties"].contains("band") || !feature["properties"].contains("level")) {
      errors.push_back(where + ": properties must carry band and level");
    }
    if (!feature.contains("geometry") || !feature["geometry"].is_object()) {
      errors.push_back(where + ": geometry missing");
      continue;
    }
    const auto& geom = feature["geometry"];
    const std::string gtype = geom.value("type", "");
    const auto& coords = geom["coordinates"];
    if (gtype == "LineString") {
      if (!coords.is_array() || coords.size() < 2) {
        errors.push_back(where + ": LineString needs >= 2 positions");
        continue;
      }
      for (const auto& pos : coords) check_position(pos, where);
    } else if (gtype == "Polygon") {
      if (!coords.is_array() || coords.empty()) {
        errors.push_back(where + ": Polygon needs rings");
        continue;
      }
      for (const auto& ring : coords) {
        if (!ring.is_array() || ring.size() < 4) {
          errors.push_back(where + ": ring needs >= 4 positions");
          continue;
        }
        if (ring.front() != ring.back()) {
          errors.push_back(where + ": ring must repeat its first position");
        }
        for (const auto& pos : ring) check_position(pos, where);
      }
    } else {
      errors.push_back(where + ": geometry type must be LineString or Polygon");
    }
  }
  return errors;
}

}  // namespace testutil
