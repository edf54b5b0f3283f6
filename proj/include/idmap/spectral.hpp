#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace idmap {

enum class Component { H1, H2, V, Unspecified };

std::string to_string(Component c);
Component component_from_string(const std::string& s);

/// Uniformly sampled ground-acceleration record. Samples are in m/s^2 after
/// ingestion; unit conversion happens in the loaders, not here.
struct Accelerogram {
  std::vector<double> samples;  // m/s^2
  double dt = 0.0;              // s, > 0
  Component component = Component::Unspecified;
  std::string station_code;
  // Extra header keys carried verbatim, unused by computation.
  std::vector<std::pair<std::string, std::string>> metadata;
};

void validate(const Accelerogram& acc);

/// Damped linear single-degree-of-freedom oscillator.
struct SdofConfig {
  double natural_frequency_hz = 1.0;  // > 0
  double damping_ratio = 0.05;        // in (0, 1)
};

void validate(const SdofConfig& cfg);

/// Destructiveness integral EIS(f) = integral of w_a^2 dt, sampled on a
/// strictly increasing frequency grid.
struct EisSpectrum {
  std::vector<double> frequencies_hz;
  std::vector<double> eis_values;  // m^2/s^3, >= 0
  double damping_ratio = 0.05;
};

void validate(const EisSpectrum& spectrum);

/// Optional sink for non-fatal diagnostics (aliasing warnings etc.).
using WarningSink = std::function<void(const std::string&)>;

/// Absolute acceleration w_a(t) of the oscillator mass under ground
/// acceleration `acc`, at the record's own sample times. Zero initial state.
/// Ground acceleration is taken as linear between samples and each step is
/// advanced by the exact solution of the piecewise-linear-forcing ODE.
std::vector<double> sdof_absolute_acceleration(const Accelerogram& acc,
                                               const SdofConfig& cfg,
                                               const WarningSink& warn = {});

/// Trapezoidal integral of w_a^2 over the full series. Result >= 0.
double destructiveness_integral(std::span<const double> w_a, double dt);

/// EIS(f) for every frequency of `frequencies_hz` (strictly increasing, > 0).
/// Frequencies are evaluated independently; order is preserved.
EisSpectrum eis_spectrum(const Accelerogram& acc,
                         std::span<const double> frequencies_hz,
                         double damping_ratio,
                         const WarningSink& warn = {});

}  // namespace idmap
