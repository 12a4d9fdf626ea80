#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <future>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "biex/dynamics.hpp"
#include "biex/error.hpp"
#include "biex/hamiltonian.hpp"
#include "biex/metrics.hpp"
#include "biex/pulses.hpp"

namespace biex {

enum class FreeParameter { amplitude1, amplitude2, delay, width };

inline const char* to_string(FreeParameter p) {
  switch (p) {
    case FreeParameter::amplitude1: return "amplitude1_meV";
    case FreeParameter::amplitude2: return "amplitude2_meV";
    case FreeParameter::delay: return "delay_fs";
    case FreeParameter::width: return "width_fs";
  }
  return "?";
}

inline FreeParameter parse_free_parameter(const std::string& name) {
  for (auto p : {FreeParameter::amplitude1, FreeParameter::amplitude2, FreeParameter::delay,
                 FreeParameter::width})
    if (name == to_string(p)) return p;
  throw Error(ErrorCode::invalid_argument, "unknown free parameter '" + name + "'");
}

struct Axis {
  FreeParameter parameter = FreeParameter::amplitude1;
  double lower = 0.0;
  double upper = 1.0;

  bool operator==(const Axis&) const = default;
};

/// Box over a subset of the scheme parameters; everything not on an axis is
/// taken from `base`. The delay axis moves pulse2 relative to pulse1, the
/// width axis sets both widths.
struct SearchSpace {
  PulseScheme base;
  std::vector<Axis> axes;

  std::size_t dimension() const { return axes.size(); }

  PulseScheme apply(std::span<const double> x) const {
    detail::require(x.size() == axes.size(), "coordinate count does not match axes");
    PulseScheme s = base;
    for (std::size_t i = 0; i < axes.size(); ++i) {
      switch (axes[i].parameter) {
        case FreeParameter::amplitude1: s.pulse1.amplitude_meV = x[i]; break;
        case FreeParameter::amplitude2: s.pulse2.amplitude_meV = x[i]; break;
        case FreeParameter::delay: s.pulse2.center_fs = s.pulse1.center_fs + x[i]; break;
        case FreeParameter::width:
          s.pulse1.width_fs = x[i];
          s.pulse2.width_fs = x[i];
          break;
      }
    }
    return s;
  }

  std::vector<double> coordinates(const PulseScheme& s) const {
    std::vector<double> x;
    for (const auto& a : axes) {
      switch (a.parameter) {
        case FreeParameter::amplitude1: x.push_back(s.pulse1.amplitude_meV); break;
        case FreeParameter::amplitude2: x.push_back(s.pulse2.amplitude_meV); break;
        case FreeParameter::delay: x.push_back(s.delay_fs()); break;
        case FreeParameter::width: x.push_back(s.pulse1.width_fs); break;
      }
    }
    return x;
  }

  /// Membership with a relative slack of 1e-9 of each axis range, so that
  /// coordinates read back from apply() stay inside.
  bool contains(std::span<const double> x) const {
    for (std::size_t i = 0; i < axes.size(); ++i) {
      const double slack = 1e-9 * (axes[i].upper - axes[i].lower);
      if (!(x[i] >= axes[i].lower - slack && x[i] <= axes[i].upper + slack)) return false;
    }
    return true;
  }

  /// Bounds are finite and ordered, amplitudes non-negative, and the scheme
  /// ordering constraint holds at every corner of the box.
  void validate() const {
    using detail::require;
    double delay_lo = base.delay_fs(), delay_hi = base.delay_fs();
    double width_lo = std::min(base.pulse1.width_fs, base.pulse2.width_fs);
    double width_hi = base.max_width_fs();
    for (std::size_t i = 0; i < axes.size(); ++i) {
      const auto& a = axes[i];
      const std::string field = std::string("optimize.axes.") + to_string(a.parameter);
      require(std::isfinite(a.lower) && std::isfinite(a.upper) && a.lower < a.upper,
              "axis bounds must be finite with lower < upper", field);
      for (std::size_t j = 0; j < i; ++j)
        require(axes[j].parameter != a.parameter, "duplicate axis", field);
      switch (a.parameter) {
        case FreeParameter::amplitude1:
        case FreeParameter::amplitude2:
          require(a.lower >= 0, "amplitude bounds must be non-negative", field);
          break;
        case FreeParameter::delay:
          delay_lo = a.lower;
          delay_hi = a.upper;
          break;
        case FreeParameter::width:
          require(a.lower > 0, "width bounds must be positive", field);
          width_lo = a.lower;
          width_hi = a.upper;
          break;
      }
    }
    if (base.kind == SchemeKind::sequential)
      require(delay_lo >= kSequentialMinSeparation * width_hi,
              "sequential box allows pulse overlap", "optimize.axes.delay_fs");
    else
      require(std::max(std::abs(delay_lo), std::abs(delay_hi)) < width_lo,
              "concurrent box allows separations of one FWHM or more",
              "optimize.axes.delay_fs");
  }
};

/// objective = bad_photon + ground_weight * p_ground
///           + penalty * max(0, p_min - p_biexciton_target)
struct ObjectiveOptions {
  double penalty = 10.0;
  double p_min = 0.98;
  double ground_weight = 1.0;

  bool operator==(const ObjectiveOptions&) const = default;
};

inline double constrained_objective(const TransferReport& r, const ObjectiveOptions& o) {
  return r.bad_photon_estimate + o.ground_weight * r.p_ground +
         o.penalty * std::max(0.0, o.p_min - r.p_biexciton_target);
}

using Evaluator = std::function<TransferReport(const PulseScheme&)>;

/// Everything needed to turn a PulseScheme into a TransferReport.
struct SimulationSetup {
  DotParameters params;
  FrameKind frame = FrameKind::rotating;
  PropagationOptions propagation;
  ModelOptions model_options;

  HamiltonianModel model(const PulseScheme& scheme) const {
    const Frame f = frame == FrameKind::rotating ? Frame::rotating(params.omega1_meV)
                                                 : Frame::lab();
    return HamiltonianModel(LevelBasis(params.n_levels()), params, scheme, f, model_options);
  }

  Trajectory trajectory(const HamiltonianModel& m) const {
    return propagate(m, ground_state(m.basis()), propagation);
  }

  TransferReport report(const PulseScheme& scheme) const {
    const auto m = model(scheme);
    return summarize(trajectory(m), m.basis(), params);
  }

  Evaluator evaluator() const {
    return [setup = *this](const PulseScheme& s) { return setup.report(s); };
  }
};

/// Evaluates every scheme, up to `threads` at a time; results keep input order.
inline std::vector<TransferReport> evaluate_batch(const Evaluator& evaluate,
                                                  const std::vector<PulseScheme>& schemes,
                                                  int threads = 1) {
  std::vector<TransferReport> out(schemes.size());
  if (threads <= 1 || schemes.size() <= 1) {
    for (std::size_t i = 0; i < schemes.size(); ++i) out[i] = evaluate(schemes[i]);
    return out;
  }
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), schemes.size());
  std::vector<std::future<void>> jobs;
  for (std::size_t w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < schemes.size(); i += workers) out[i] = evaluate(schemes[i]);
    }));
  }
  for (auto& j : jobs) j.get();
  return out;
}

struct GridOptions {
  std::vector<int> resolution;  // points per axis, >= 2
  std::size_t cap = 10000;
  ObjectiveOptions objective;
  int threads = 1;
};

struct GridPoint {
  std::vector<double> coordinates;
  PulseScheme scheme;
  TransferReport report;  // objective = constrained objective
};

/// Full-factorial scan, last axis varying fastest.
inline std::vector<GridPoint> grid_scan(const SearchSpace& space, const GridOptions& options,
                                        const Evaluator& evaluate) {
  using detail::require;
  space.validate();
  require(options.resolution.size() == space.dimension(),
          "grid resolution needs one entry per axis", "optimize.resolution");
  std::size_t total = 1;
  for (int r : options.resolution) {
    require(r >= 2, "grid resolution must be >= 2 per axis", "optimize.resolution");
    total *= static_cast<std::size_t>(r);
    require(total <= options.cap, "grid exceeds the evaluation cap", "optimize.grid_cap");
  }

  std::vector<GridPoint> points(total);
  std::vector<PulseScheme> schemes(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::vector<double> x(space.dimension());
    std::size_t rem = flat;
    for (std::size_t d = space.dimension(); d-- > 0;) {
      const auto r = static_cast<std::size_t>(options.resolution[d]);
      const std::size_t k = rem % r;
      rem /= r;
      const auto& a = space.axes[d];
      x[d] = a.lower + (a.upper - a.lower) * static_cast<double>(k) / static_cast<double>(r - 1);
    }
    schemes[flat] = space.apply(x);
    points[flat].coordinates = std::move(x);
    points[flat].scheme = schemes[flat];
  }
  auto reports = evaluate_batch(evaluate, schemes, options.threads);
  for (std::size_t i = 0; i < total; ++i) {
    points[i].report = std::move(reports[i]);
    points[i].report.objective = constrained_objective(points[i].report, options.objective);
  }
  return points;
}

/// Index of the lowest objective; ties go to the earliest point.
inline std::size_t best_index(const std::vector<GridPoint>& points) {
  detail::require(!points.empty(), "no grid points");
  std::size_t best = 0;
  for (std::size_t i = 1; i < points.size(); ++i)
    if (points[i].report.objective < points[best].report.objective) best = i;
  return best;
}

struct NelderMeadOptions {
  int max_evaluations = 500;
  /// Stop when the simplex diameter falls below this fraction of the box
  /// diagonal.
  double tolerance = 1e-4;
  /// Initial simplex edge as a fraction of each axis range.
  double initial_step = 0.1;
};

struct NelderMeadResult {
  std::vector<double> best;  // unit-box coordinates
  double value = 0.0;
  int evaluations = 0;
};

/// Bounded Nelder-Mead on the unit box [0,1]^n; trial points are clamped.
/// `batch` maps a list of points to their values; shrink steps and the
/// initial simplex are submitted as one batch.
template <class Batch>
NelderMeadResult nelder_mead(Batch&& batch, std::vector<double> start,
                             const NelderMeadOptions& options) {
  using Point = std::vector<double>;
  const std::size_t n = start.size();
  detail::require(n >= 1, "nelder_mead needs at least one dimension");
  detail::require(options.max_evaluations >= static_cast<int>(n) + 1,
                  "evaluation budget smaller than the initial simplex",
                  "optimize.max_evaluations");
  auto clamp = [](Point p) {
    for (double& v : p) v = std::clamp(v, 0.0, 1.0);
    return p;
  };
  int used = 0;
  auto eval = [&](const std::vector<Point>& pts) {
    used += static_cast<int>(pts.size());
    return batch(pts);
  };

  std::vector<Point> simplex{clamp(start)};
  for (std::size_t i = 0; i < n; ++i) {
    Point p = simplex[0];
    p[i] += (p[i] + options.initial_step <= 1.0) ? options.initial_step : -options.initial_step;
    simplex.push_back(clamp(p));
  }
  std::vector<double> values = eval(simplex);

  auto combine = [&](const Point& a, const Point& b, double t) {  // a + t (b - a)
    Point p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = a[i] + t * (b[i] - a[i]);
    return clamp(p);
  };
  const double stop = options.tolerance * std::sqrt(static_cast<double>(n));

  while (true) {
    std::vector<std::size_t> order(n + 1);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    {
      std::vector<Point> s;
      std::vector<double> v;
      for (auto i : order) {
        s.push_back(simplex[i]);
        v.push_back(values[i]);
      }
      simplex = std::move(s);
      values = std::move(v);
    }
    double diameter = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < n; ++k) d2 += std::pow(simplex[i][k] - simplex[0][k], 2);
      diameter = std::max(diameter, std::sqrt(d2));
    }
    if (diameter < stop || used + 1 > options.max_evaluations) break;

    Point centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / static_cast<double>(n);
    const Point& worst = simplex[n];

    const Point reflected = combine(centroid, worst, -1.0);
    const double f_r = eval({reflected})[0];
    if (f_r < values[0]) {
      if (used + 1 > options.max_evaluations) {
        simplex[n] = reflected;
        values[n] = f_r;
        continue;
      }
      const Point expanded = combine(centroid, worst, -2.0);
      const double f_e = eval({expanded})[0];
      if (f_e < f_r) {
        simplex[n] = expanded;
        values[n] = f_e;
      } else {
        simplex[n] = reflected;
        values[n] = f_r;
      }
      continue;
    }
    if (f_r < values[n - 1]) {
      simplex[n] = reflected;
      values[n] = f_r;
      continue;
    }
    if (used + 1 > options.max_evaluations) break;
    const bool outside = f_r < values[n];
    const Point contracted = outside ? combine(centroid, reflected, 0.5)
                                     : combine(centroid, worst, 0.5);
    const double f_c = eval({contracted})[0];
    if (outside ? f_c <= f_r : f_c < values[n]) {
      simplex[n] = contracted;
      values[n] = f_c;
      continue;
    }
    if (used + static_cast<int>(n) > options.max_evaluations) break;
    std::vector<Point> shrunk;
    for (std::size_t i = 1; i <= n; ++i) shrunk.push_back(combine(simplex[0], simplex[i], 0.5));
    const auto f_s = eval(shrunk);
    for (std::size_t i = 1; i <= n; ++i) {
      simplex[i] = shrunk[i - 1];
      values[i] = f_s[i - 1];
    }
  }
  const auto best = static_cast<std::size_t>(
      std::min_element(values.begin(), values.end()) - values.begin());
  return {simplex[best], values[best], used};
}

struct RefineOptions {
  ObjectiveOptions objective;
  NelderMeadOptions simplex;
  int threads = 1;
};

struct TraceEntry {
  std::vector<double> coordinates;
  PulseScheme scheme;
  TransferReport report;  // objective = constrained objective
};

struct OptimizationResult {
  PulseScheme best_params;
  TransferReport best_report;
  std::vector<double> best_coordinates;
  int evaluations = 0;
  std::vector<TraceEntry> trace;  // submission order
};

/// Derivative-free simplex descent from `start` inside `space`.
inline OptimizationResult refine(const PulseScheme& start, const SearchSpace& space,
                                 const RefineOptions& options, const Evaluator& evaluate) {
  space.validate();
  const auto x0 = space.coordinates(start);
  detail::require(space.contains(x0), "refine start lies outside the search box",
                  "optimize.start");

  const std::size_t n = space.dimension();
  auto to_physical = [&](const std::vector<double>& u) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
      x[i] = space.axes[i].lower + u[i] * (space.axes[i].upper - space.axes[i].lower);
    return x;
  };
  std::vector<double> u0(n);
  for (std::size_t i = 0; i < n; ++i)
    u0[i] = std::clamp(
        (x0[i] - space.axes[i].lower) / (space.axes[i].upper - space.axes[i].lower), 0.0, 1.0);

  OptimizationResult result;
  auto batch = [&](const std::vector<std::vector<double>>& points) {
    std::vector<PulseScheme> schemes;
    std::vector<std::vector<double>> xs;
    for (const auto& u : points) {
      xs.push_back(to_physical(u));
      schemes.push_back(space.apply(xs.back()));
    }
    auto reports = evaluate_batch(evaluate, schemes, options.threads);
    std::vector<double> values;
    for (std::size_t i = 0; i < points.size(); ++i) {
      reports[i].objective = constrained_objective(reports[i], options.objective);
      values.push_back(reports[i].objective);
      result.trace.push_back({xs[i], schemes[i], reports[i]});
    }
    return values;
  };
  const auto nm = nelder_mead(batch, u0, options.simplex);

  std::size_t best = 0;
  for (std::size_t i = 1; i < result.trace.size(); ++i)
    if (result.trace[i].report.objective < result.trace[best].report.objective) best = i;
  result.best_params = result.trace[best].scheme;
  result.best_report = result.trace[best].report;
  result.best_coordinates = result.trace[best].coordinates;
  result.evaluations = nm.evaluations;
  return result;
}

/// Up to `count` grid points in increasing objective order, skipping any
/// point within one grid step (on every axis) of a point already chosen.
inline std::vector<std::size_t> distinct_seeds(const std::vector<GridPoint>& grid,
                                               const SearchSpace& space,
                                               const std::vector<int>& resolution,
                                               std::size_t count) {
  std::vector<std::size_t> order(grid.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return grid[a].report.objective < grid[b].report.objective;
  });
  auto neighbours = [&](std::size_t a, std::size_t b) {
    for (std::size_t d = 0; d < space.dimension(); ++d) {
      const double step = (space.axes[d].upper - space.axes[d].lower) / (resolution[d] - 1);
      if (std::abs(grid[a].coordinates[d] - grid[b].coordinates[d]) > 1.5 * step) return false;
    }
    return true;
  };
  std::vector<std::size_t> seeds;
  for (std::size_t i : order) {
    if (seeds.size() >= count) break;
    bool close = false;
    for (std::size_t s : seeds) close = close || neighbours(i, s);
    if (!close) seeds.push_back(i);
  }
  return seeds;
}

struct SearchOutcome {
  std::vector<GridPoint> grid;
  std::vector<std::size_t> seeds;
  OptimizationResult result;  // merged over all starts
};

/// Grid scan, then one refine() per distinct seed; the merged trace keeps
/// submission order and the best point over every start wins.
inline SearchOutcome grid_and_refine(const SearchSpace& space, const GridOptions& grid_options,
                                     const RefineOptions& refine_options, std::size_t starts,
                                     const Evaluator& evaluate) {
  detail::require(starts >= 1, "need at least one refine start", "optimize.starts");
  SearchOutcome out;
  out.grid = grid_scan(space, grid_options, evaluate);
  out.seeds = distinct_seeds(out.grid, space, grid_options.resolution, starts);
  bool first = true;
  for (std::size_t seed : out.seeds) {
    auto r = refine(out.grid[seed].scheme, space, refine_options, evaluate);
    out.result.evaluations += r.evaluations;
    if (first || r.best_report.objective < out.result.best_report.objective) {
      out.result.best_params = r.best_params;
      out.result.best_report = r.best_report;
      out.result.best_coordinates = r.best_coordinates;
      first = false;
    }
    for (auto& t : r.trace) out.result.trace.push_back(std::move(t));
  }
  return out;
}

/// Landscape CSV: free parameters, p_biexciton, dwell_fs, objective.
inline void write_landscape_csv(std::ostream& os, const SearchSpace& space,
                                const std::vector<std::vector<double>>& coordinates,
                                const std::vector<const TransferReport*>& reports) {
  for (const auto& a : space.axes) os << to_string(a.parameter) << ',';
  os << "p_biexciton,dwell_fs,objective\n";
  for (std::size_t i = 0; i < coordinates.size(); ++i) {
    for (double x : coordinates[i]) os << detail::format_double(x) << ',';
    os << detail::format_double(reports[i]->p_biexciton_target) << ','
       << detail::format_double(reports[i]->dwell_fs) << ','
       << detail::format_double(reports[i]->objective) << '\n';
  }
}

}  // namespace biex
