#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "biex/pulses.hpp"

using namespace biex;

namespace {

GaussianPulse pulse(double a = 1.5, double t0 = 200.0, double tau = 1000.0) {
  return {a, t0, tau, 1300.0, 0.0};
}

// Composite Simpson over [t0 - 8 tau, t0 + 8 tau].
double simpson_area(const GaussianPulse& p, int n = 20000) {
  const double a = p.center_fs - 8 * p.width_fs, b = p.center_fs + 8 * p.width_fs;
  const double h = (b - a) / n;
  double s = envelope(p, a) + envelope(p, b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * envelope(p, a + i * h);
  return s * h / 3.0;
}

}  // namespace

TEST(Envelope, ClosedFormValues) {
  const auto p = pulse();
  EXPECT_DOUBLE_EQ(envelope(p, p.center_fs), 1.5);
  EXPECT_NEAR(envelope(p, p.center_fs + 500.0), 0.75, 1e-15);
  EXPECT_NEAR(envelope(p, p.center_fs - 500.0), 0.75, 1e-15);
  EXPECT_NEAR(envelope(p, p.center_fs + 3000.0) / (1.5 * std::pow(2.0, -36)), 1.0, 1e-12);
  EXPECT_NEAR(std::pow(2.0, -36), 1.455e-11, 1e-14);
}

TEST(Envelope, EvenAndPositiveProperty) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> amp(0.01, 50), center(-5000, 5000), width(50, 3000),
      offset(0, 3);
  for (int i = 0; i < 500; ++i) {
    const auto p = pulse(amp(rng), center(rng), width(rng));
    const double dt = offset(rng) * p.width_fs;
    EXPECT_NEAR(envelope(p, p.center_fs + dt), envelope(p, p.center_fs - dt),
                1e-14 * p.amplitude_meV);
    EXPECT_GT(envelope(p, p.center_fs + dt), 0.0);
    EXPECT_LE(envelope(p, p.center_fs + dt), p.amplitude_meV);
  }
}

TEST(Envelope, AreaMatchesQuadrature) {
  for (double tau : {100.0, 1000.0, 2345.0}) {
    const auto p = pulse(0.7, -300.0, tau);
    EXPECT_NEAR(envelope_area(p) / simpson_area(p), 1.0, 1e-10) << tau;
  }
}

TEST(Envelope, PiAreaAmplitude) {
  // Pulse area (coupling / hbar) * integral of the envelope equals pi.
  const auto params = default_dot_parameters(2);
  const double c1 = ground_exciton_bright_coupling(params);
  const double a1 = pi_area_amplitude(1000.0, c1);
  EXPECT_NEAR(c1 * simpson_area(pulse(a1, 0.0, 1000.0)) / kHbar, kPi, 1e-9);
  EXPECT_NEAR(a1, 1.3736, 5e-4);
  const double a2 = pi_area_amplitude(1000.0, exciton_biexciton_bright_coupling(params));
  EXPECT_NEAR(a2 / a1, 1.0 / std::sqrt(0.8), 1e-12);
}

TEST(Field, LabFrameIsRealCosine) {
  auto p = pulse(2.0, 0.0, 1000.0);
  // omega t0 = 2 pi m at t0 = 0.
  EXPECT_NEAR(pulse_field(p, 0.0, Frame::lab()).real(), 2.0, 1e-15);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> t(-4000, 4000);
  PulseScheme s{p, pulse(1.0, 700.0, 1000.0), SchemeKind::concurrent};
  s.pulse2.carrier_meV = 1296.0;
  for (int i = 0; i < 200; ++i) {
    const double ti = t(rng);
    const auto e = field(s, ti, Frame::lab());
    EXPECT_EQ(e.plus.imag(), 0.0);
    EXPECT_EQ(e.plus, e.minus);
    const double want = envelope(s.pulse1, ti) * std::cos(1300.0 * ti / kHbar) +
                        envelope(s.pulse2, ti) * std::cos(1296.0 * ti / kHbar);
    EXPECT_NEAR(e.plus.real(), want, 1e-12);
  }
}

TEST(Field, RotatingFrameResonantPulseHasNoPhase) {
  const auto p = pulse(2.0, 100.0, 1000.0);
  const auto frame = Frame::rotating(1300.0);
  for (double t : {-1000.0, 0.0, 100.0, 2500.0}) {
    const auto e = pulse_field(p, t, frame);
    EXPECT_NEAR(e.real(), 0.5 * envelope(p, t), 1e-15);
    EXPECT_NEAR(e.imag(), 0.0, 1e-15);
  }
}

TEST(Field, RotatingFrameBeatPeriod) {
  auto p = pulse(2.0, 0.0, 1000.0);
  p.carrier_meV = 1296.0;
  const auto frame = Frame::rotating(1300.0);
  const double period = 2 * kPi * kHbar / 4.0;
  EXPECT_NEAR(period, 1033.9, 0.05);
  // Phase advances by +4 meV t / hbar and returns after one period.
  const auto at = [&](double t) { return pulse_field(p, t, frame) / (0.5 * envelope(p, t)); };
  EXPECT_NEAR(std::abs(at(period) - at(0.0)), 0.0, 1e-12);
  EXPECT_NEAR(std::arg(at(period / 4)), kPi / 2, 1e-12);
  EXPECT_NEAR(std::abs(at(period / 2) + 1.0), 0.0, 1e-12);
}

TEST(Field, PhaseShiftsBothFrames) {
  auto p = pulse(1.0, 0.0, 1000.0);
  p.phase_rad = kPi / 2;
  EXPECT_NEAR(pulse_field(p, 0.0, Frame::lab()).real(), 0.0, 1e-15);
  EXPECT_NEAR(pulse_field(p, 0.0, Frame::rotating(1300.0)).imag(), -0.5, 1e-15);
}

TEST(Window, Examples) {
  PulseScheme c{pulse(1, 0, 1000), pulse(1, 0, 1000), SchemeKind::concurrent};
  EXPECT_DOUBLE_EQ(total_window(c).start_fs, -4000.0);
  EXPECT_DOUBLE_EQ(total_window(c).end_fs, 4000.0);
  PulseScheme s{pulse(1, 0, 1000), pulse(1, 2500, 1000), SchemeKind::sequential};
  EXPECT_DOUBLE_EQ(total_window(s).start_fs, -4000.0);
  EXPECT_DOUBLE_EQ(total_window(s).end_fs, 6500.0);
  // Far shorter than the radiative lifetime of 1e6 fs.
  EXPECT_LT(total_window(s).duration_fs(), 0.02 * 1e6);
  // Boundary envelope 2^-64 of peak.
  EXPECT_LT(envelope(s.pulse2, total_window(s).end_fs) / s.pulse2.amplitude_meV, 1e-19);
}

TEST(Scheme, PiAreaSchemeIsValid) {
  const auto params = default_dot_parameters(2);
  for (auto kind : {SchemeKind::sequential, SchemeKind::concurrent}) {
    const auto s = pi_area_scheme(params, kind);
    EXPECT_NO_THROW(validate(s, params));
    EXPECT_DOUBLE_EQ(s.pulse1.carrier_meV - s.pulse2.carrier_meV, 4.0);
    EXPECT_TRUE(width_warnings(s, params).empty());
  }
  EXPECT_DOUBLE_EQ(pi_area_scheme(params, SchemeKind::sequential).delay_fs(), 2500.0);
  EXPECT_DOUBLE_EQ(pi_area_scheme(params, SchemeKind::concurrent).delay_fs(), 0.0);
}

TEST(Scheme, SequentialOverlapAtMidpoint) {
  // At 2.355 tau separation the envelope product at the midpoint is < 1e-3
  // of the peak product.
  const auto a = pulse(1.0, 0.0, 1000.0);
  const auto b = pulse(1.0, kSequentialMinSeparation * 1000.0, 1000.0);
  const double mid = 0.5 * b.center_fs;
  EXPECT_LT(envelope(a, mid) * envelope(b, mid), 1e-3);
}

TEST(Scheme, ValidationErrors) {
  const auto params = default_dot_parameters(2);
  auto expect_field = [&](const PulseScheme& s, const std::string& field) {
    try {
      validate(s, params);
      ADD_FAILURE() << field;
    } catch (const Error& e) {
      EXPECT_EQ(e.field(), field);
    }
  };
  auto s = pi_area_scheme(params, SchemeKind::sequential);
  s.pulse2.center_fs = 2000.0;
  expect_field(s, "scheme.pulse2.center_fs");
  s = pi_area_scheme(params, SchemeKind::concurrent);
  s.pulse2.center_fs = 1000.0;
  expect_field(s, "scheme.pulse2.center_fs");
  s = pi_area_scheme(params, SchemeKind::concurrent);
  s.pulse2.carrier_meV += 0.5;
  expect_field(s, "scheme.pulse2.detuning_meV");
  s = pi_area_scheme(params, SchemeKind::concurrent);
  s.pulse1.width_fs = 0.0;
  expect_field(s, "scheme.pulse1.width_fs");
  s = pi_area_scheme(params, SchemeKind::concurrent);
  s.pulse2.amplitude_meV = -1.0;
  expect_field(s, "scheme.pulse2.amplitude_meV");
}

TEST(Scheme, WidthWarnings) {
  const auto params = default_dot_parameters(2);
  EXPECT_NEAR(2 * kPi * kHbar / 40.0, 103.39, 0.01);
  // 100 fs is within the slack of the 103 fs level bound; 80 fs is not.
  EXPECT_EQ(width_warnings(pi_area_scheme(params, SchemeKind::sequential, 100.0), params).size(),
            2u);
  EXPECT_EQ(width_warnings(pi_area_scheme(params, SchemeKind::sequential, 80.0), params).size(),
            4u);
  // 500 fs blurs only the binding energy.
  EXPECT_EQ(width_warnings(pi_area_scheme(params, SchemeKind::sequential, 500.0), params).size(),
            2u);
  EXPECT_TRUE(width_warnings(pi_area_scheme(params, SchemeKind::sequential, 1000.0), params)
                  .empty());
  // One-level dots have no second level to protect.
  const auto p1 = default_dot_parameters(1);
  EXPECT_EQ(width_warnings(pi_area_scheme(p1, SchemeKind::sequential, 500.0), p1).size(), 2u);
}
