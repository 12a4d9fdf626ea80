#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "biex/dynamics.hpp"
#include "biex/error.hpp"
#include "biex/levels.hpp"
#include "biex/units.hpp"

namespace biex {

/// Figures of merit for one transfer run. Ground-state leftover is a lost
/// cycle, not a bad photon, so it is kept out of p_residual.
struct TransferReport {
  std::vector<std::pair<std::string, double>> final_populations;
  double p_biexciton_target = 0.0;  // |1+,1->
  double p_ground = 0.0;
  double p_residual = 0.0;  // 1 - target - ground
  double dwell_fs = 0.0;    // integrated single-exciton population
  double bad_photon_estimate = 0.0;
  /// Value minimized by whoever produced the report; summarize() stores the
  /// bad-photon estimate, the optimizer its constrained objective.
  double objective = 0.0;
};

inline std::vector<std::size_t> single_exciton_states(const LevelBasis& basis) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < basis.size(); ++i)
    if (basis.exciton_count(i) == 1) out.push_back(i);
  return out;
}

/// Trapezoidal integral over the recorded samples of the summed populations
/// of `states`.
inline double dwell_time(const Trajectory& traj, std::span<const std::size_t> states) {
  detail::require(!states.empty(), "dwell_time needs at least one state");
  auto summed = [&](std::size_t k) {
    double s = 0.0;
    for (std::size_t i : states) s += traj.populations[k].at(i);
    return s;
  };
  double total = 0.0;
  for (std::size_t k = 1; k < traj.size(); ++k)
    total += 0.5 * (summed(k - 1) + summed(k)) * (traj.times[k] - traj.times[k - 1]);
  return total;
}

/// Leftover population outside target and ground, plus in-flight decay
/// gamma * dwell.
inline double bad_photon_estimate(double p_residual, double dwell_fs, double gamma_per_ns) {
  detail::require(gamma_per_ns >= 0, "gamma must be non-negative", "dot.gamma_per_ns");
  return p_residual + per_ns_to_per_fs(gamma_per_ns) * dwell_fs;
}

inline double bad_photon_estimate(const TransferReport& report, double gamma_per_ns) {
  return bad_photon_estimate(report.p_residual, report.dwell_fs, gamma_per_ns);
}

inline TransferReport summarize(const Trajectory& traj, const LevelBasis& basis,
                                const DotParameters& params) {
  detail::require(traj.size() >= 1, "empty trajectory");
  const auto& final = traj.final_populations();
  detail::require(final.size() == basis.size(), "trajectory does not match basis");

  TransferReport r;
  const auto labels = basis.labels();
  for (std::size_t i = 0; i < basis.size(); ++i) r.final_populations.emplace_back(labels[i], final[i]);
  const auto target = basis.index_of(
      StateLabel::biexciton({1, Spin::plus}, {1, Spin::minus}));
  r.p_biexciton_target = final[target];
  r.p_ground = final[0];
  // Summing the remaining states directly keeps the residual non-negative.
  r.p_residual = 0.0;
  for (std::size_t i = 1; i < final.size(); ++i)
    if (i != target) r.p_residual += final[i];
  const auto excitons = single_exciton_states(basis);
  r.dwell_fs = dwell_time(traj, excitons);
  r.bad_photon_estimate = bad_photon_estimate(r, params.gamma_per_ns);
  r.objective = r.bad_photon_estimate;
  return r;
}

inline nlohmann::ordered_json to_json(const TransferReport& r) {
  nlohmann::ordered_json pops = nlohmann::ordered_json::object();
  for (const auto& [label, p] : r.final_populations) pops[label] = p;
  nlohmann::ordered_json out;
  out["final_populations"] = std::move(pops);
  out["p_biexciton_target"] = r.p_biexciton_target;
  out["p_ground"] = r.p_ground;
  out["p_residual"] = r.p_residual;
  out["dwell_fs"] = r.dwell_fs;
  out["bad_photon_estimate"] = r.bad_photon_estimate;
  out["objective"] = r.objective;
  return out;
}

}  // namespace biex
