#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "biex/error.hpp"
#include "biex/hamiltonian.hpp"
#include "biex/pulses.hpp"
#include "biex/units.hpp"

namespace biex {

using StateVector = Eigen::VectorXcd;

struct PropagationOptions {
  double dt_fs = 1.0;
  int record_stride = 10;
  /// Largest tolerated | |psi|^2 - 1 | before the run is aborted.
  double max_norm_drift = 1e-6;
};

/// Recommended step for each frame: 1 fs rotating, 0.02 fs lab.
inline constexpr double default_dt(FrameKind frame) {
  return frame == FrameKind::rotating ? 1.0 : 0.02;
}

/// Lab-frame RK4 damps each amplitude by ~(E dt / hbar)^6 / 144 per step; at
/// dt = 0.02 fs a biexciton (E ~ 2.6 eV) loses ~1e-3 of its norm over 5 ps.
inline constexpr double default_norm_drift(FrameKind frame) {
  return frame == FrameKind::rotating ? 1e-6 : 1e-2;
}

struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
  std::vector<std::vector<double>> populations;
  double dt_used = 0.0;
  FrameKind frame = FrameKind::rotating;

  std::size_t size() const { return times.size(); }
  const std::vector<double>& final_populations() const { return populations.back(); }
};

inline StateVector basis_state(const LevelBasis& basis, std::size_t index) {
  StateVector psi = StateVector::Zero(static_cast<Eigen::Index>(basis.size()));
  psi(static_cast<Eigen::Index>(index)) = 1.0;
  return psi;
}

inline StateVector ground_state(const LevelBasis& basis) { return basis_state(basis, 0); }

inline std::vector<double> populations_of(const StateVector& psi) {
  std::vector<double> p(static_cast<std::size_t>(psi.size()));
  for (Eigen::Index i = 0; i < psi.size(); ++i) p[static_cast<std::size_t>(i)] = std::norm(psi(i));
  return p;
}

namespace detail {

/// Classic RK4 for i hbar dpsi/dt = H(t) psi. Buffers are reused between
/// steps; H at the end of one step is the start of the next.
class Rk4Stepper {
 public:
  explicit Rk4Stepper(const HamiltonianModel& model)
      : model_(model), n_(static_cast<Eigen::Index>(model.dimension())) {
    h_start_.resize(n_, n_);
    h_mid_.resize(n_, n_);
    h_end_.resize(n_, n_);
    k1_.resize(n_);
    k2_.resize(n_);
    k3_.resize(n_);
    k4_.resize(n_);
    tmp_.resize(n_);
  }

  void reset(double t_fs) {
    t_cached_ = t_fs;
    model_.evaluate_into(t_fs, h_start_);
  }

  // psi(t) -> psi(t + dt); dt may be negative.
  void step(StateVector& psi, double t_fs, double dt_fs) {
    if (t_fs != t_cached_) reset(t_fs);
    model_.evaluate_into(t_fs + 0.5 * dt_fs, h_mid_);
    model_.evaluate_into(t_fs + dt_fs, h_end_);
    const std::complex<double> f(0.0, -1.0 / kHbar);
    k1_.noalias() = f * (h_start_ * psi);
    tmp_ = psi + (0.5 * dt_fs) * k1_;
    k2_.noalias() = f * (h_mid_ * tmp_);
    tmp_ = psi + (0.5 * dt_fs) * k2_;
    k3_.noalias() = f * (h_mid_ * tmp_);
    tmp_ = psi + dt_fs * k3_;
    k4_.noalias() = f * (h_end_ * tmp_);
    psi += (dt_fs / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    std::swap(h_start_, h_end_);
    t_cached_ = t_fs + dt_fs;
  }

 private:
  const HamiltonianModel& model_;
  Eigen::Index n_;
  Matrix h_start_, h_mid_, h_end_;
  StateVector k1_, k2_, k3_, k4_, tmp_;
  double t_cached_ = std::nan("");
};

inline void check_norm(const StateVector& psi, double t_fs, double tolerance) {
  const double drift = std::abs(psi.squaredNorm() - 1.0);
  if (!(drift <= tolerance)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "norm drift %.3e exceeds %.1e at t = %.6g fs", drift,
                  tolerance, t_fs);
    throw Error(ErrorCode::integration_failure, buf, "t_fs=" + std::to_string(t_fs));
  }
}

inline void check_initial_state(const HamiltonianModel& model, const StateVector& psi0) {
  require(psi0.size() == static_cast<Eigen::Index>(model.dimension()),
          "initial state has the wrong dimension");
  require(std::abs(psi0.norm() - 1.0) <= 1e-12, "initial state must be normalized");
}

inline std::size_t step_count(double span, double dt) {
  return static_cast<std::size_t>(std::max(1.0, std::ceil(std::abs(span) / dt - 1e-9)));
}

}  // namespace detail

/// Fixed-step RK4 over total_window(scheme). The step is shrunk so that an
/// integer number of steps spans the window exactly; samples are recorded
/// every `record_stride` steps and at the final time. No renormalization.
inline Trajectory propagate(const HamiltonianModel& model, const StateVector& psi0,
                            const PropagationOptions& options = {}) {
  detail::require(std::isfinite(options.dt_fs) && options.dt_fs > 0, "dt must be positive",
                  "sim.dt_fs");
  detail::require(options.record_stride >= 1, "record_stride must be >= 1",
                  "sim.record_stride");
  detail::check_initial_state(model, psi0);

  const TimeWindow window = total_window(model.scheme());
  const std::size_t steps = detail::step_count(window.duration_fs(), options.dt_fs);
  const double dt = window.duration_fs() / static_cast<double>(steps);

  Trajectory traj;
  traj.dt_used = dt;
  traj.frame = model.frame().kind;
  const std::size_t stride = static_cast<std::size_t>(options.record_stride);
  const std::size_t samples = steps / stride + 2;
  traj.times.reserve(samples);
  traj.states.reserve(samples);
  traj.populations.reserve(samples);

  auto record = [&](double t, const StateVector& psi) {
    traj.times.push_back(t);
    traj.states.push_back(psi);
    traj.populations.push_back(populations_of(psi));
  };

  StateVector psi = psi0;
  detail::Rk4Stepper stepper(model);
  stepper.reset(window.start_fs);
  record(window.start_fs, psi);
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = window.start_fs + static_cast<double>(i) * dt;
    stepper.step(psi, t, dt);
    const double t_next = i + 1 == steps ? window.end_fs
                                         : window.start_fs + static_cast<double>(i + 1) * dt;
    detail::check_norm(psi, t_next, options.max_norm_drift);
    if ((i + 1) % stride == 0 || i + 1 == steps) record(t_next, psi);
  }
  return traj;
}

/// Propagates psi from t_from to t_to (either direction) without recording.
inline StateVector propagate_between(const HamiltonianModel& model, const StateVector& psi0,
                                     double t_from, double t_to, double dt_fs,
                                     double max_norm_drift = 1e-6) {
  detail::require(std::isfinite(dt_fs) && dt_fs > 0, "dt must be positive", "sim.dt_fs");
  const std::size_t steps = detail::step_count(t_to - t_from, dt_fs);
  const double dt = (t_to - t_from) / static_cast<double>(steps);
  StateVector psi = psi0;
  detail::Rk4Stepper stepper(model);
  stepper.reset(t_from);
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = t_from + static_cast<double>(i) * dt;
    stepper.step(psi, t, dt);
    detail::check_norm(psi, t + dt, max_norm_drift);
  }
  return psi;
}

/// Largest change in final populations when the step is halved.
inline double convergence_check(const HamiltonianModel& model, const StateVector& psi0,
                                double dt_fs, double max_norm_drift = 1e-6) {
  detail::check_initial_state(model, psi0);
  const TimeWindow w = total_window(model.scheme());
  const auto coarse = populations_of(
      propagate_between(model, psi0, w.start_fs, w.end_fs, dt_fs, max_norm_drift));
  const auto fine = populations_of(
      propagate_between(model, psi0, w.start_fs, w.end_fs, 0.5 * dt_fs, max_norm_drift));
  double defect = 0.0;
  for (std::size_t i = 0; i < coarse.size(); ++i)
    defect = std::max(defect, std::abs(coarse[i] - fine[i]));
  return defect;
}

namespace detail {

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// RFC 4180 quoting for fields that contain a comma.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

/// Header: t_fs, P_<label>..., Re_env1_meV, Re_env2_meV. The last two columns
/// hold the real part of each pulse's field in the trajectory's frame.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                                 const HamiltonianModel& model) {
  os << "t_fs";
  for (const auto& label : model.basis().labels()) os << ',' << detail::csv_field("P_" + label);
  os << ",Re_env1_meV,Re_env2_meV\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double t = traj.times[i];
    os << detail::format_double(t);
    for (double p : traj.populations[i]) os << ',' << detail::format_double(p);
    os << ',' << detail::format_double(pulse_field(model.scheme().pulse1, t, model.frame()).real())
       << ',' << detail::format_double(pulse_field(model.scheme().pulse2, t, model.frame()).real())
       << '\n';
  }
}

}  // namespace biex
