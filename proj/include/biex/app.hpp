#pragma once

#include <cstdio>
#include <filesystem>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "biex/config_io.hpp"
#include "biex/dynamics.hpp"
#include "biex/metrics.hpp"
#include "biex/optimizer.hpp"
#include "biex/validate.hpp"

namespace biex {

enum class Verb { simulate, optimize, scan, validate };

inline Verb parse_verb(const std::string& s) {
  if (s == "simulate") return Verb::simulate;
  if (s == "optimize") return Verb::optimize;
  if (s == "scan") return Verb::scan;
  if (s == "validate") return Verb::validate;
  throw Error(ErrorCode::invalid_argument, "unknown verb '" + s + "'", "verb");
}

struct Command {
  Verb verb = Verb::simulate;
  std::filesystem::path config_path;  // empty: all defaults
  std::filesystem::path output_dir;   // empty: config output.directory
  std::vector<std::string> overrides;
  int threads = 1;
};

inline Json error_json(const Error& e) {
  Json j{{"code", code_name(e.code())}, {"message", e.what()}};
  if (!e.field().empty()) j["field"] = e.field();
  return j;
}

namespace detail {

inline Json summary_json(const TransferReport& report, const PulseScheme& scheme,
                         const ExperimentConfig& config) {
  Json j = to_json(report);
  j["gamma_per_ns"] = config.dot.gamma_per_ns;
  j["scheme"] = to_json(scheme, config.dot.omega1_meV);
  return j;
}

inline void print_report(std::ostream& out, const TransferReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "p_biexciton=%.6f p_ground=%.6f p_residual=%.6f dwell=%.1f fs bad_photon=%.5f\n",
                r.p_biexciton_target, r.p_ground, r.p_residual, r.dwell_fs,
                r.bad_photon_estimate);
  out << buf;
}

inline std::string landscape(const SearchSpace& space, const std::vector<GridPoint>& grid,
                             const std::vector<TraceEntry>& trace) {
  std::vector<std::vector<double>> coords;
  std::vector<const TransferReport*> reports;
  for (const auto& p : grid) {
    coords.push_back(p.coordinates);
    reports.push_back(&p.report);
  }
  for (const auto& t : trace) {
    coords.push_back(t.coordinates);
    reports.push_back(&t.report);
  }
  std::ostringstream os;
  write_landscape_csv(os, space, coords, reports);
  return os.str();
}

inline GridOptions grid_options(const ExperimentConfig& c, int threads) {
  return {c.optimize.resolution, c.optimize.grid_cap, c.optimize.objective, threads};
}

inline int run_simulate(const ExperimentConfig& c, const std::filesystem::path& dir,
                        std::ostream& out) {
  const auto setup = c.setup();
  const auto model = setup.model(c.scheme);
  const auto traj = setup.trajectory(model);
  const auto report = summarize(traj, model.basis(), c.dot);
  print_report(out, report);
  RunArtifacts a{"simulate", &traj, &model, summary_json(report, c.scheme, c), {}, {}};
  const auto m = write_outputs(a, c, dir);
  out << "wrote " << m.files.size() + 1 << " files to " << dir.string() << "\n";
  return 0;
}

inline int run_scan(const ExperimentConfig& c, const std::filesystem::path& dir, int threads,
                    std::ostream& out) {
  const auto space = c.search_space();
  const auto grid = grid_scan(space, grid_options(c, threads), c.setup().evaluator());
  const auto& best = grid[best_index(grid)];
  out << "scanned " << grid.size() << " points; best: ";
  print_report(out, best.report);
  RunArtifacts a{"scan", nullptr, nullptr, summary_json(best.report, best.scheme, c),
                 landscape(space, grid, {}), {}};
  const auto m = write_outputs(a, c, dir);
  out << "wrote " << m.files.size() + 1 << " files to " << dir.string() << "\n";
  return 0;
}

/// Grid scan to seed, simplex refinement from the best distinct seeds, then
/// a final recorded run of the optimum.
inline int run_optimize(const ExperimentConfig& c, const std::filesystem::path& dir,
                        int threads, std::ostream& out) {
  const auto space = c.search_space();
  const auto setup = c.setup();
  RefineOptions ro;
  ro.objective = c.optimize.objective;
  ro.simplex = {c.optimize.max_evaluations, c.optimize.tolerance, c.optimize.initial_step};
  ro.threads = threads;
  const auto search = grid_and_refine(space, grid_options(c, threads), ro,
                                      static_cast<std::size_t>(c.optimize.starts),
                                      setup.evaluator());
  const auto& grid = search.grid;
  const auto& result = search.result;
  out << "grid: " << grid.size() << " points; refine: " << search.seeds.size() << " starts, "
      << result.evaluations << " evaluations; objective " << result.best_report.objective
      << "\n";

  const auto model = setup.model(result.best_params);
  const auto traj = setup.trajectory(model);
  auto report = summarize(traj, model.basis(), c.dot);
  report.objective = constrained_objective(report, c.optimize.objective);
  print_report(out, report);

  Json optimum;
  optimum["scheme"] = to_json(result.best_params, c.dot.omega1_meV);
  Json coords = Json::object();
  for (std::size_t i = 0; i < space.axes.size(); ++i)
    coords[to_string(space.axes[i].parameter)] = result.best_coordinates[i];
  optimum["free_parameters"] = std::move(coords);
  optimum["report"] = to_json(report);
  optimum["p_biexciton_target"] = report.p_biexciton_target;
  optimum["grid_points"] = grid.size();
  optimum["evaluations"] = result.evaluations;
  optimum["objective_options"] = {{"penalty", c.optimize.objective.penalty},
                                  {"p_min", c.optimize.objective.p_min},
                                  {"ground_weight", c.optimize.objective.ground_weight}};

  RunArtifacts a{"optimize", &traj, &model, summary_json(report, result.best_params, c),
                 landscape(space, grid, result.trace), std::move(optimum)};
  const auto m = write_outputs(a, c, dir);
  out << "wrote " << m.files.size() + 1 << " files to " << dir.string() << "\n";
  return 0;
}

inline int run_validate(std::ostream& out) {
  const auto checks = run_validation_suite();
  bool ok = true;
  for (const auto& c : checks) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-30s %12.4e %s %-10.6g %s\n", c.name.c_str(), c.value,
                  c.relation.c_str(), c.threshold, c.passed ? "PASS" : "FAIL");
    out << buf;
    ok = ok && c.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace detail

/// Runs one verb. Progress goes to `out`; failures are reported on `err` as
/// a single JSON object. Returns the process exit status.
inline int run_command(const Command& cmd, std::ostream& out, std::ostream& err) {
  try {
    if (cmd.verb == Verb::validate) return detail::run_validate(out);
    detail::require(cmd.threads >= 1, "threads must be >= 1", "threads");
    const auto loaded = load_config(cmd.config_path, cmd.overrides);
    for (const auto& line : loaded.log) out << line << "\n";
    const auto& c = loaded.config;
    const std::filesystem::path dir =
        cmd.output_dir.empty() ? std::filesystem::path(c.output.directory) : cmd.output_dir;
    switch (cmd.verb) {
      case Verb::simulate: return detail::run_simulate(c, dir, out);
      case Verb::scan: return detail::run_scan(c, dir, cmd.threads, out);
      case Verb::optimize: return detail::run_optimize(c, dir, cmd.threads, out);
      case Verb::validate: break;
    }
    return 0;
  } catch (const Error& e) {
    err << error_json(e).dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << Json{{"code", "internal"}, {"message", e.what()}}.dump() << "\n";
    return 3;
  }
}

}  // namespace biex
