#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "biex/error.hpp"
#include "biex/levels.hpp"
#include "biex/units.hpp"

namespace biex {

/// Gaussian carrier pulse. `width_fs` is the FWHM of the field envelope and
/// `amplitude_meV` is the peak coupling energy d_1 * E.
struct GaussianPulse {
  double amplitude_meV = 0.0;
  double center_fs = 0.0;
  double width_fs = 1000.0;
  double carrier_meV = 0.0;  // absolute hbar * omega of the carrier
  double phase_rad = 0.0;

  bool operator==(const GaussianPulse&) const = default;
};

enum class SchemeKind { sequential, concurrent };

inline const char* to_string(SchemeKind kind) {
  return kind == SchemeKind::sequential ? "sequential" : "concurrent";
}

/// Ground-to-exciton pulse (carrier omega_1) plus exciton-to-biexciton pulse
/// (carrier omega_1 - Delta).
struct PulseScheme {
  GaussianPulse pulse1;
  GaussianPulse pulse2;
  SchemeKind kind = SchemeKind::sequential;

  double delay_fs() const { return pulse2.center_fs - pulse1.center_fs; }
  double max_width_fs() const { return std::max(pulse1.width_fs, pulse2.width_fs); }

  bool operator==(const PulseScheme&) const = default;
};

/// Minimum centre separation for the sequential scheme, in units of the
/// widest pulse FWHM.
inline constexpr double kSequentialMinSeparation = 2.355;
inline constexpr double kSequentialDefaultSeparation = 2.5;

/// Half-width of the simulation window around each pulse centre, in FWHM.
inline constexpr double kWindowHalfWidths = 4.0;

inline double envelope(const GaussianPulse& p, double t_fs) {
  const double x = (t_fs - p.center_fs) / p.width_fs;
  return p.amplitude_meV * std::exp(-4.0 * kLn2 * x * x);
}

/// Time integral of the envelope, A * tau * sqrt(pi / (4 ln 2)).
inline double envelope_area(const GaussianPulse& p) {
  return p.amplitude_meV * p.width_fs * std::sqrt(kPi / (4.0 * kLn2));
}

/// Peak amplitude giving pulse area pi on a transition whose effective
/// coupling is `coupling * A` (e.g. sqrt(2) d_1 for the bright exciton).
inline double pi_area_amplitude(double width_fs, double coupling) {
  return kPi * kHbar / (coupling * width_fs * std::sqrt(kPi / (4.0 * kLn2)));
}

/// Bright-state couplings of the two ladder steps under linear polarization.
inline double ground_exciton_bright_coupling(const DotParameters& p) {
  return std::sqrt(2.0) * p.ground_exciton_dipole(1);
}
inline double exciton_biexciton_bright_coupling(const DotParameters& p) {
  return std::sqrt(2.0) * p.exciton_biexciton_dipole(1);
}

enum class FrameKind { lab, rotating };

inline const char* to_string(FrameKind kind) {
  return kind == FrameKind::lab ? "lab" : "rotating";
}

/// Reference frame for the field and the Hamiltonian. The rotating frame
/// removes exciton_count * reference from every diagonal entry.
struct Frame {
  FrameKind kind = FrameKind::rotating;
  double reference_meV = 0.0;

  static Frame lab() { return {FrameKind::lab, 0.0}; }
  static Frame rotating(double reference_meV) {
    return {FrameKind::rotating, reference_meV};
  }
};

/// Contribution of a single pulse to E^+ (= E^-). Lab frame: real
/// envelope * cos(omega t + phi). Rotating frame: co-rotating half-envelope
/// 1/2 * envelope * exp(-i((omega - omega_ref) t + phi)).
inline std::complex<double> pulse_field(const GaussianPulse& p, double t_fs,
                                        const Frame& frame) {
  const double env = envelope(p, t_fs);
  if (frame.kind == FrameKind::lab)
    return {env * std::cos(p.carrier_meV * t_fs / kHbar + p.phase_rad), 0.0};
  const double phase = (p.carrier_meV - frame.reference_meV) * t_fs / kHbar + p.phase_rad;
  return std::polar(0.5 * env, -phase);
}

/// sigma_+ and sigma_- components of the drive.
struct DrivePair {
  std::complex<double> plus;
  std::complex<double> minus;

  std::complex<double> operator[](Spin s) const { return s == Spin::plus ? plus : minus; }
};

/// Linear polarization: E^+ = E^- = E_1 + E_2.
inline DrivePair field(const PulseScheme& scheme, double t_fs, const Frame& frame) {
  const auto e = pulse_field(scheme.pulse1, t_fs, frame) +
                 pulse_field(scheme.pulse2, t_fs, frame);
  return {e, e};
}

struct TimeWindow {
  double start_fs = 0.0;
  double end_fs = 0.0;

  double duration_fs() const { return end_fs - start_fs; }
};

inline TimeWindow total_window(const PulseScheme& scheme) {
  const auto& a = scheme.pulse1;
  const auto& b = scheme.pulse2;
  return {std::min(a.center_fs - kWindowHalfWidths * a.width_fs,
                   b.center_fs - kWindowHalfWidths * b.width_fs),
          std::max(a.center_fs + kWindowHalfWidths * a.width_fs,
                   b.center_fs + kWindowHalfWidths * b.width_fs)};
}

/// The width checks below allow this much slack on the uncertainty bounds
/// 2 pi hbar / Delta and 2 pi hbar / (omega_2 - omega_1), so the nominal
/// 1000 fs pulses (bound ~1034 fs) pass.
inline constexpr double kUncertaintySlack = 0.9;

/// Human-readable warnings for pulses short enough to blur the binding
/// energy or the second exciton level. Empty when the scheme is admissible.
inline std::vector<std::string> width_warnings(const PulseScheme& scheme,
                                               const DotParameters& params) {
  std::vector<std::string> out;
  const double binding_bound = 2.0 * kPi * kHbar / params.binding_energy_meV;
  const double level_bound = params.level_offsets_meV.size() > 1
                                 ? 2.0 * kPi * kHbar / params.level_offsets_meV[1]
                                 : 0.0;
  auto check = [&](const GaussianPulse& p, const char* name) {
    if (p.width_fs < kUncertaintySlack * level_bound)
      out.push_back(std::string(name) + " width " + std::to_string(p.width_fs) +
                    " fs is below 2*pi*hbar/(omega2-omega1) = " +
                    std::to_string(level_bound) +
                    " fs: the second exciton level falls inside the pulse bandwidth");
    if (p.width_fs < kUncertaintySlack * binding_bound)
      out.push_back(std::string(name) + " width " + std::to_string(p.width_fs) +
                    " fs is below 2*pi*hbar/Delta = " + std::to_string(binding_bound) +
                    " fs: the two ladder transitions are not spectrally separated");
  };
  check(scheme.pulse1, "pulse1");
  check(scheme.pulse2, "pulse2");
  return out;
}

/// Structural checks shared by the config loader and the optimizer.
/// Throws invalid-argument with the offending config field.
inline void validate(const PulseScheme& scheme, const DotParameters& params) {
  using detail::require;
  for (const auto* p : {&scheme.pulse1, &scheme.pulse2}) {
    const std::string name = p == &scheme.pulse1 ? "scheme.pulse1" : "scheme.pulse2";
    require(std::isfinite(p->width_fs) && p->width_fs > 0, "width must be positive",
            name + ".width_fs");
    require(std::isfinite(p->amplitude_meV) && p->amplitude_meV >= 0,
            "amplitude must be non-negative", name + ".amplitude_meV");
    require(std::isfinite(p->center_fs), "center must be finite", name + ".center_fs");
    require(std::isfinite(p->phase_rad), "phase must be finite", name + ".phase_rad");
  }
  const double split = scheme.pulse1.carrier_meV - scheme.pulse2.carrier_meV;
  require(std::abs(split - params.binding_energy_meV) <= 1e-9 * params.omega1_meV,
          "pulse1 and pulse2 carriers must differ by the binding energy",
          "scheme.pulse2.detuning_meV");
  const double delay = scheme.delay_fs();
  const double tau = scheme.max_width_fs();
  if (scheme.kind == SchemeKind::sequential) {
    require(delay >= kSequentialMinSeparation * tau,
            "sequential scheme needs pulse2 at least 2.355 FWHM after pulse1",
            "scheme.pulse2.center_fs");
  } else {
    require(std::abs(delay) < tau,
            "concurrent scheme needs pulse centres closer than one FWHM",
            "scheme.pulse2.center_fs");
  }
}

/// Scheme with both pulses at pi area on their bright transitions, resonant
/// carriers, and the default centre layout for `kind`.
inline PulseScheme pi_area_scheme(const DotParameters& params, SchemeKind kind,
                                  double width_fs = 1000.0) {
  PulseScheme s;
  s.kind = kind;
  s.pulse1 = {pi_area_amplitude(width_fs, ground_exciton_bright_coupling(params)), 0.0,
              width_fs, params.omega1_meV, 0.0};
  s.pulse2 = {pi_area_amplitude(width_fs, exciton_biexciton_bright_coupling(params)),
              kind == SchemeKind::sequential ? kSequentialDefaultSeparation * width_fs : 0.0,
              width_fs, params.omega1_meV - params.binding_energy_meV, 0.0};
  return s;
}

}  // namespace biex
