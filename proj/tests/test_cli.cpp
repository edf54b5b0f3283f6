#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "idmap/intensity.hpp"
#include "geojson_check.hpp"
#include "test_util.hpp"

using testutil::CliResult;
using testutil::run_cli;
using testutil::TempDir;
using testutil::write_file;

namespace {

struct SpectrumRow {
  double frequency = 0.0;
  double eis = 0.0;
  bool has_intensity = false;
  double intensity = 0.0;
};

std::vector<SpectrumRow> parse_spectrum_csv(const std::string& text) {
  std::vector<SpectrumRow> rows;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    SpectrumRow row;
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = line.find(',', c1 + 1);
    row.frequency = std::stod(line.substr(0, c1));
    row.eis = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    const std::string rest = line.substr(c2 + 1);
    if (!rest.empty()) {
      row.has_intensity = true;
      row.intensity = std::stod(rest);
    }
    rows.push_back(row);
  }
  return rows;
}

std::string record_text(const std::vector<double>& samples, double dt,
                        const std::string& station = "TST1", const std::string& comp = "H1") {
  std::string text = "station=" + station + "\ncomponent=" + comp + "\n";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "dt=%.17g\n", dt);
  text += buf;
  text += "units=m/s2\n";
  for (double s : samples) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", s);
    text += buf;
  }
  return text;
}

}  // namespace

TEST_CASE("cli bands table matches the published period endpoints") {
  const auto result = run_cli("bands");
  REQUIRE(result.exit_code == 0);

  std::istringstream in(result.out);
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::string> rows;
  while (std::getline(in, line)) {
    if (!line.empty()) rows.push_back(line);
  }
  REQUIRE(rows.size() == 12);
  CHECK(rows[3].find("Id124") != std::string::npos);
  CHECK(rows[3].find("1.00") != std::string::npos);
  CHECK(rows[3].find("1.41") != std::string::npos);
  CHECK(rows[6].find("Id127") != std::string::npos);
  CHECK(rows[6].find("0.35") != std::string::npos);
  CHECK(rows[6].find("0.50") != std::string::npos);
}

TEST_CASE("cli bands --json round-trips the band table exactly") {
  const auto result = run_cli("bands --json");
  REQUIRE(result.exit_code == 0);
  const auto doc = nlohmann::json::parse(result.out);
  REQUIRE(doc.size() == 12);
  const auto& table = idmap::band_table();
  for (std::size_t k = 0; k < 12; ++k) {
    CHECK(doc[k]["index"].get<int>() == table[k].index);
    CHECK(doc[k]["label"].get<std::string>() == table[k].label);
    CHECK(doc[k]["f_low_hz"].get<double>() == table[k].f_low_hz);
    CHECK(doc[k]["f_high_hz"].get<double>() == table[k].f_high_hz);
    CHECK(doc[k]["t_low_s"].get<double>() == table[k].t_low_s);
    CHECK(doc[k]["t_high_s"].get<double>() == table[k].t_high_s);
  }
}

TEST_CASE("cli spectrum") {
  TempDir dir;

  SUBCASE("zero record: EIS all zero, intensity null") {
    const auto rec = dir.path() / "zero.txt";
    write_file(rec, record_text(std::vector<double>(300, 0.0), 0.02));
    const auto result = run_cli("spectrum " + rec.string() + " --grid-points-per-band 3");
    REQUIRE(result.exit_code == 0);
    const auto rows = parse_spectrum_csv(result.out);
    REQUIRE(rows.size() == 12 * 3 - 11);
    for (const auto& row : rows) {
      CHECK(row.eis == 0.0);
      CHECK(!row.has_intensity);
    }
  }

  SUBCASE("doubling the record shifts every intensity by one degree") {
    std::vector<double> samples = testutil::broadband_samples(0.5, 0.02, 20.0);
    const auto rec1 = dir.path() / "r1.txt";
    const auto rec2 = dir.path() / "r2.txt";
    write_file(rec1, record_text(samples, 0.02));
    for (double& s : samples) s *= 2.0;
    write_file(rec2, record_text(samples, 0.02));

    const auto a = run_cli("spectrum " + rec1.string() + " --grid-points-per-band 4");
    const auto b = run_cli("spectrum " + rec2.string() + " --grid-points-per-band 4");
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    const auto rows_a = parse_spectrum_csv(a.out);
    const auto rows_b = parse_spectrum_csv(b.out);
    REQUIRE(rows_a.size() == rows_b.size());
    for (std::size_t i = 0; i < rows_a.size(); ++i) {
      REQUIRE(rows_a[i].has_intensity);
      REQUIRE(rows_b[i].has_intensity);
      CHECK(rows_b[i].intensity - rows_a[i].intensity == doctest::Approx(1.0).epsilon(1e-9));
    }
  }

  SUBCASE("resonant sine peaks at the grid point nearest its frequency") {
    std::vector<double> samples(3001);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      samples[i] = std::sin(2.0 * std::numbers::pi * 1.0 * i * 0.01);
    }
    const auto rec = dir.path() / "sine.txt";
    write_file(rec, record_text(samples, 0.01));
    const auto result = run_cli("spectrum " + rec.string() + " --grid-points-per-band 5");
    REQUIRE(result.exit_code == 0);
    const auto rows = parse_spectrum_csv(result.out);
    std::size_t argmax = 0;
    std::size_t nearest = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].eis > rows[argmax].eis) argmax = i;
      if (std::abs(rows[i].frequency - 1.0) < std::abs(rows[nearest].frequency - 1.0)) nearest = i;
    }
    CHECK(argmax == nearest);
    CHECK(rows[nearest].frequency == doctest::Approx(1.0));
  }

  SUBCASE("missing record file is a data error") {
    const auto result = run_cli("spectrum " + (dir.path() / "absent.txt").string());
    CHECK(result.exit_code == 2);
  }

  SUBCASE("-o writes the CSV plus a run manifest, collating aliasing warnings") {
    const auto rec = dir.path() / "coarse.txt";
    write_file(rec, record_text(std::vector<double>(120, 0.5), 0.1));  // f*dt up to 1.6
    const auto out = dir.path() / "out" / "spectrum.csv";
    const auto result =
        run_cli("spectrum " + rec.string() + " -o " + out.string() + " --grid-points-per-band 3");
    REQUIRE(result.exit_code == 0);
    CHECK(std::filesystem::exists(out));

    const auto manifest = nlohmann::json::parse(testutil::read_file(dir.path() / "out" / "run.json"));
    CHECK(manifest["command"] == "spectrum");
    CHECK(manifest["outputs"][0] == "spectrum.csv");
    REQUIRE(manifest["inputs"].size() == 1);
    CHECK(manifest["inputs"][0]["fnv1a64"].get<std::string>().size() == 16);

    // many grid frequencies alias at dt = 0.1 s; the CLI summarises
    CHECK(result.err.find("alias") != std::string::npos);
    CHECK(result.err.find("suppressed") != std::string::npos);
  }
}

TEST_CASE("cli intensity on an impulse dataset matches the analytic band means") {
  // A single-sample impulse of area I = A*dt drives every oscillator with
  // EIS(f) = I^2 * 2*pi*f * (1 + 4*xi^2)/(4*xi), so the log-frequency band
  // mean is I^2 * 2*pi*(1+4*xi^2)/(4*xi) * (f_hi - f_lo)/ln(f_hi/f_lo).
  const double dt = 5e-4;
  const double duration = 80.0;
  const int n = static_cast<int>(duration / dt) + 1;
  std::vector<double> samples(n, 0.0);
  samples[1] = 1.0;

  TempDir dir;
  const auto dataset = dir.path() / "event";
  testutil::write_dataset(dataset, {{"IMP1", 45.5, 26.0, 1.0}}, samples, dt);

  const auto result = run_cli("intensity " + dataset.string() + " --json");
  REQUIRE(result.exit_code == 0);
  const auto doc = nlohmann::json::parse(result.out);
  REQUIRE(doc["stations"].size() == 1);
  const auto& bands = doc["stations"][0]["bands"];

  const double impulse_area = 1.0 * dt;
  const double xi = 0.05;
  const double coefficient =
      impulse_area * impulse_area * 2.0 * std::numbers::pi * (1.0 + 4.0 * xi * xi) / (4.0 * xi);
  for (const auto& band : idmap::band_table()) {
    const double mean =
        coefficient * (band.f_high_hz - band.f_low_hz) / std::log(band.f_high_hz / band.f_low_hz);
    const double expected = std::log(mean) / std::log(7.5) + 6.45;
    REQUIRE(!bands[band.label].is_null());
    // reported values are rounded to 2 decimals
    CHECK(std::abs(bands[band.label].get<double>() - expected) <= 0.0061);
    CHECK(doc["stations"][0]["component_used"][band.label] == "H1");
  }
}

TEST_CASE("cli intensity scaling law and diagnostics") {
  const double dt = 0.02;
  const auto base = testutil::broadband_samples(0.5, dt, 20.0);
  TempDir dir;
  const auto d1 = dir.path() / "ev1";
  const auto d2 = dir.path() / "ev2";
  testutil::write_dataset(d1, {{"STA1", 45.5, 26.0, 1.0}, {"STA2", 45.9, 26.4, 0.7}}, base, dt);
  testutil::write_dataset(d2, {{"STA1", 45.5, 26.0, 2.0}, {"STA2", 45.9, 26.4, 1.4}}, base, dt);

  const auto r1 = run_cli("intensity " + d1.string() + " --json --grid-points-per-band 7");
  const auto r2 = run_cli("intensity " + d2.string() + " --json --grid-points-per-band 7");
  REQUIRE(r1.exit_code == 0);
  REQUIRE(r2.exit_code == 0);
  const auto doc1 = nlohmann::json::parse(r1.out);
  const auto doc2 = nlohmann::json::parse(r2.out);

  const double expected_shift = 2.0 * std::log(2.0) / std::log(7.5);  // ~0.688
  REQUIRE(doc1["stations"].size() == 2);
  for (std::size_t s = 0; s < 2; ++s) {
    for (const auto& band : idmap::band_table()) {
      const auto& v1 = doc1["stations"][s]["bands"][band.label];
      const auto& v2 = doc2["stations"][s]["bands"][band.label];
      REQUIRE(!v1.is_null());
      REQUIRE(!v2.is_null());
      // two 2-decimal roundings allow at most 0.01 of slack
      CHECK(std::abs(v2.get<double>() - v1.get<double>() - expected_shift) <= 0.0101);
    }
  }

  SUBCASE("table output lists stations in code order") {
    const auto table = run_cli("intensity " + d1.string() + " --grid-points-per-band 7");
    REQUIRE(table.exit_code == 0);
    const auto pos1 = table.out.find("STA1");
    const auto pos2 = table.out.find("STA2");
    CHECK(pos1 != std::string::npos);
    CHECK(pos2 != std::string::npos);
    CHECK(pos1 < pos2);
  }
}

TEST_CASE("cli intensity with an empty records directory fails cleanly") {
  TempDir dir;
  const auto dataset = dir.path() / "event";
  testutil::write_dataset(dataset, {}, {}, 0.01);
  std::filesystem::create_directories(dataset / "records");
  // the dataset has no stations either; give it one so only records are missing
  write_file(dataset / "stations.csv", "code,name,lat,lon\nSTA1,One,45.5,26.0\n");

  const auto result = run_cli("intensity " + dataset.string());
  CHECK(result.exit_code == 2);
  CHECK(result.err.find("no records") != std::string::npos);
}

TEST_CASE("cli map") {
  const double dt = 0.02;
  const auto base = testutil::broadband_samples(0.5, dt, 20.0);
  TempDir dir;
  const auto dataset = dir.path() / "event";
  testutil::write_dataset(dataset,
                          {{"STA1", 45.5, 26.0, 1.0}, {"STA2", 45.9, 26.6, 0.6},
                           {"STA3", 45.1, 25.6, 0.3}},
                          base, dt);

  const std::string common = " --grid-points-per-band 5 --grid-nx 30 --grid-ny 30";

  SUBCASE("produces a valid bounded grid and contours") {
    const auto out = dir.path() / "out";
    const auto result = run_cli("map " + dataset.string() + " --band Id127 --out-dir " +
                                out.string() + common);
    REQUIRE(result.exit_code == 0);
    CHECK(result.out.find("3 station(s)") != std::string::npos);

    const auto geojson = testutil::read_file(out / "contours_Id127.geojson");
    const auto errors = testutil::geojson_structural_errors(geojson);
    for (const auto& e : errors) MESSAGE(e);
    CHECK(errors.empty());

    // station intensities bound the grid
    const auto intensity = run_cli("intensity " + dataset.string() + " --json" + common);
    REQUIRE(intensity.exit_code == 0);
    const auto doc = nlohmann::json::parse(intensity.out);
    double lo = 1e300, hi = -1e300;
    for (const auto& st : doc["stations"]) {
      const double v = st["bands"]["Id127"].get<double>();
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const auto rows = testutil::parse_grid_csv(testutil::read_file(out / "grid_Id127.csv"));
    REQUIRE(rows.size() == 30 * 30);
    for (const auto& row : rows) {
      REQUIRE(row.has_value);
      CHECK(row.intensity >= lo - 0.011);  // reported station values carry 2-decimal rounding
      CHECK(row.intensity <= hi + 0.011);
    }

    // the manifest records the effective config and checksummed inputs
    const auto manifest = nlohmann::json::parse(testutil::read_file(out / "run.json"));
    CHECK(manifest["command"] == "map");
    CHECK(manifest["config"]["grid_nx"] == 30);
    CHECK(manifest["inputs"].size() == 5);  // event.json, stations.csv, 3 records
    for (const auto& input : manifest["inputs"]) {
      CHECK(input["fnv1a64"].get<std::string>().size() == 16);
    }
  }

  SUBCASE("unknown band label is a usage error listing the labels") {
    const auto result = run_cli("map " + dataset.string() + " --band Id999");
    CHECK(result.exit_code == 1);
    CHECK(result.err.find("Id121") != std::string::npos);
    CHECK(result.err.find("Id1212") != std::string::npos);
  }

  SUBCASE("shuffled record file order produces byte-identical outputs") {
    // same records under permuted file names
    const auto shuffled = dir.path() / "event_shuffled";
    write_file(shuffled / "event.json", testutil::read_file(dataset / "event.json"));
    write_file(shuffled / "stations.csv", testutil::read_file(dataset / "stations.csv"));
    write_file(shuffled / "records" / "zz_first.txt",
               testutil::read_file(dataset / "records" / "STA1_h1.txt"));
    write_file(shuffled / "records" / "aa_last.txt",
               testutil::read_file(dataset / "records" / "STA3_h1.txt"));
    write_file(shuffled / "records" / "mm_mid.txt",
               testutil::read_file(dataset / "records" / "STA2_h1.txt"));

    const auto out_a = dir.path() / "out_a";
    const auto out_b = dir.path() / "out_b";
    REQUIRE(run_cli("map " + dataset.string() + " --band Id126 --out-dir " + out_a.string() +
                    common).exit_code == 0);
    REQUIRE(run_cli("map " + shuffled.string() + " --band Id126 --out-dir " + out_b.string() +
                    common).exit_code == 0);
    CHECK(testutil::read_file(out_a / "grid_Id126.csv") ==
          testutil::read_file(out_b / "grid_Id126.csv"));
    CHECK(testutil::read_file(out_a / "contours_Id126.geojson") ==
          testutil::read_file(out_b / "contours_Id126.geojson"));
  }
}

TEST_CASE("cli config precedence: flags over file over defaults") {
  TempDir dir;
  const auto rec = dir.path() / "rec.txt";
  std::vector<double> samples(501);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i] = std::sin(2.0 * std::numbers::pi * 1.0 * i * 0.02);
  }
  write_file(rec, record_text(samples, 0.02));
  write_file(dir.path() / "idmap.cfg", "pointwise_offset = 6.75\ngrid_points_per_band = 3\n");

  const auto defaults = run_cli("spectrum " + rec.string() + " --grid-points-per-band 3");
  const auto from_file =
      run_cli("--config " + (dir.path() / "idmap.cfg").string() + " spectrum " + rec.string());
  const auto flag_wins = run_cli("--config " + (dir.path() / "idmap.cfg").string() + " spectrum " +
                                 rec.string() + " --pointwise-offset 7.75");
  REQUIRE(defaults.exit_code == 0);
  REQUIRE(from_file.exit_code == 0);
  REQUIRE(flag_wins.exit_code == 0);

  const auto rows_default = parse_spectrum_csv(defaults.out);
  const auto rows_file = parse_spectrum_csv(from_file.out);
  const auto rows_flag = parse_spectrum_csv(flag_wins.out);
  REQUIRE(rows_default.size() == rows_file.size());
  REQUIRE(rows_default.size() == rows_flag.size());
  for (std::size_t i = 0; i < rows_default.size(); ++i) {
    if (!rows_default[i].has_intensity) continue;
    CHECK(rows_file[i].intensity - rows_default[i].intensity == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(rows_flag[i].intensity - rows_default[i].intensity == doctest::Approx(2.0).epsilon(1e-6));
  }

  SUBCASE("unknown config key is rejected") {
    write_file(dir.path() / "bad.cfg", "sigma = 1\n");
    const auto result =
        run_cli("--config " + (dir.path() / "bad.cfg").string() + " spectrum " + rec.string());
    CHECK(result.exit_code == 2);
    CHECK(result.err.find("unknown") != std::string::npos);
  }

  SUBCASE("unknown flag is a usage error") {
    const auto result = run_cli("spectrum " + rec.string() + " --frobnicate");
    CHECK(result.exit_code == 1);
  }
}
