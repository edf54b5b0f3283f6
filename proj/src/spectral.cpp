#include "idmap/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "idmap/errors.hpp"

namespace idmap {

std::string to_string(Component c) {
  switch (c) {
    case Component::H1: return "H1";
    case Component::H2: return "H2";
    case Component::V: return "V";
    case Component::Unspecified: return "UNSPECIFIED";
  }
  return "UNSPECIFIED";
}

Component component_from_string(const std::string& s) {
  if (s == "H1") return Component::H1;
  if (s == "H2") return Component::H2;
  if (s == "V") return Component::V;
  if (s == "UNSPECIFIED") return Component::Unspecified;
  throw ValidationError("component: expected H1, H2, V or UNSPECIFIED, got '" + s + "'");
}

void validate(const Accelerogram& acc) {
  if (!(acc.dt > 0.0) || !std::isfinite(acc.dt)) {
    throw ValidationError("accelerogram: dt must be finite and > 0");
  }
  if (acc.samples.size() < 2) {
    throw ValidationError("accelerogram: samples must hold at least 2 values");
  }
  for (std::size_t i = 0; i < acc.samples.size(); ++i) {
    if (!std::isfinite(acc.samples[i])) {
      throw ValidationError("accelerogram: samples[" + std::to_string(i) + "] is not finite");
    }
  }
}

void validate(const SdofConfig& cfg) {
  if (!(cfg.natural_frequency_hz > 0.0) || !std::isfinite(cfg.natural_frequency_hz)) {
    throw ValidationError("sdof: natural_frequency_hz must be finite and > 0");
  }
  if (!(cfg.damping_ratio > 0.0 && cfg.damping_ratio < 1.0)) {
    throw ValidationError("sdof: damping_ratio must lie in (0, 1)");
  }
}

void validate(const EisSpectrum& spectrum) {
  const auto& fs = spectrum.frequencies_hz;
  if (fs.size() != spectrum.eis_values.size()) {
    throw ValidationError("spectrum: frequencies_hz and eis_values differ in length");
  }
  if (fs.size() < 2) {
    throw ValidationError("spectrum: frequencies_hz must hold at least 2 values");
  }
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (!(fs[i] > 0.0) || !std::isfinite(fs[i])) {
      throw ValidationError("spectrum: frequencies_hz[" + std::to_string(i) + "] must be finite and > 0");
    }
    if (i > 0 && !(fs[i] > fs[i - 1])) {
      throw ValidationError("spectrum: frequencies_hz must be strictly increasing");
    }
    if (!(spectrum.eis_values[i] >= 0.0) || !std::isfinite(spectrum.eis_values[i])) {
      throw ValidationError("spectrum: eis_values[" + std::to_string(i) + "] must be finite and >= 0");
    }
  }
}

// Exact discrete propagation of x'' + 2*xi*w*x' + w^2*x = f(t) over one step
// of length h with f linear between f0 and f1. The particular solution is
//   x_p(t) = (f0 + df*t/h)/w^2 - (2*xi/w)*slope,  slope = df/(h*w^2),
// and the homogeneous remainder decays with exp(-xi*w*t) at frequency w_d.
// State at sample times is exact for piecewise-linear forcing.
std::vector<double> sdof_absolute_acceleration(const Accelerogram& acc,
                                               const SdofConfig& cfg,
                                               const WarningSink& warn) {
  validate(acc);
  validate(cfg);

  const double h = acc.dt;
  const double xi = cfg.damping_ratio;
  const double omega = 2.0 * std::numbers::pi * cfg.natural_frequency_hz;

  if (warn && cfg.natural_frequency_hz * h > 0.1) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "sdof: natural_frequency*dt = %.4g exceeds 0.1; the record may alias this oscillator",
                  cfg.natural_frequency_hz * h);
    warn(buf);
  }

  const double omega_d = omega * std::sqrt(1.0 - xi * xi);
  const double decay = std::exp(-xi * omega * h);
  const double cos_h = std::cos(omega_d * h);
  const double sin_h = std::sin(omega_d * h);
  const double xi_omega = xi * omega;
  const double inv_w2 = 1.0 / (omega * omega);
  const double two_xi_over_w = 2.0 * xi / omega;

  const std::size_t n = acc.samples.size();
  std::vector<double> w_a(n);
  w_a[0] = 0.0;  // zero initial displacement and velocity

  double x = 0.0;
  double v = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double f0 = -acc.samples[i];
    const double f1 = -acc.samples[i + 1];
    const double slope = (f1 - f0) * inv_w2 / h;  // particular-solution velocity
    const double xp0 = f0 * inv_w2 - two_xi_over_w * slope;
    const double xp1 = f1 * inv_w2 - two_xi_over_w * slope;
    const double xh = x - xp0;
    const double vh = v - slope;
    const double q = (vh + xi_omega * xh) / omega_d;
    x = decay * (xh * cos_h + q * sin_h) + xp1;
    v = decay * (vh * cos_h - (omega_d * xh + xi_omega * q) * sin_h) + slope;
    w_a[i + 1] = -(2.0 * xi_omega * v + omega * omega * x);
  }
  return w_a;
}

double destructiveness_integral(std::span<const double> w_a, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ValidationError("destructiveness_integral: dt must be finite and > 0");
  }
  if (w_a.size() < 2) {
    throw ValidationError("destructiveness_integral: series must hold at least 2 samples");
  }
  double sum = 0.0;  // fixed left-to-right order keeps results reproducible
  for (double w : w_a) {
    sum += w * w;
  }
  sum -= 0.5 * (w_a.front() * w_a.front() + w_a.back() * w_a.back());
  return std::max(0.0, sum * dt);
}

EisSpectrum eis_spectrum(const Accelerogram& acc,
                         std::span<const double> frequencies_hz,
                         double damping_ratio,
                         const WarningSink& warn) {
  validate(acc);
  if (frequencies_hz.empty()) {
    throw ValidationError("eis_spectrum: frequency grid is empty");
  }
  for (std::size_t i = 0; i < frequencies_hz.size(); ++i) {
    if (!(frequencies_hz[i] > 0.0) || !std::isfinite(frequencies_hz[i])) {
      throw ValidationError("eis_spectrum: frequencies_hz[" + std::to_string(i) +
                            "] must be finite and > 0");
    }
    if (i > 0 && !(frequencies_hz[i] > frequencies_hz[i - 1])) {
      throw ValidationError("eis_spectrum: frequencies_hz must be strictly increasing");
    }
  }

  EisSpectrum out;
  out.damping_ratio = damping_ratio;
  out.frequencies_hz.assign(frequencies_hz.begin(), frequencies_hz.end());
  out.eis_values.resize(frequencies_hz.size());
  for (std::size_t i = 0; i < frequencies_hz.size(); ++i) {
    const SdofConfig cfg{frequencies_hz[i], damping_ratio};
    const std::vector<double> w_a = sdof_absolute_acceleration(acc, cfg, warn);
    out.eis_values[i] = destructiveness_integral(w_a, acc.dt);
  }
  return out;
}

}  // namespace idmap
