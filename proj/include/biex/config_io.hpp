#pragma once

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "biex/dynamics.hpp"
#include "biex/error.hpp"
#include "biex/levels.hpp"
#include "biex/metrics.hpp"
#include "biex/optimizer.hpp"
#include "biex/pulses.hpp"

namespace biex {

using Json = nlohmann::ordered_json;

struct SimSettings {
  double dt_fs = 1.0;
  int record_stride = 10;
  FrameKind frame = FrameKind::rotating;
  double max_norm_drift = 1e-6;

  bool operator==(const SimSettings&) const = default;
};

struct OptimizeSettings {
  std::vector<Axis> axes;
  std::vector<int> resolution;
  std::size_t grid_cap = 10000;
  ObjectiveOptions objective;
  int max_evaluations = 500;
  double tolerance = 1e-4;
  double initial_step = 0.1;
  int starts = 3;  // distinct grid seeds refined

  bool operator==(const OptimizeSettings&) const = default;
};

struct OutputSettings {
  std::string directory = "out";
  bool csv = true;
  bool json = true;

  bool operator==(const OutputSettings&) const = default;
};

/// Fully resolved experiment: every optional field has been defaulted and
/// every module invariant checked.
struct ExperimentConfig {
  DotParameters dot;
  int n_levels = 2;
  PulseScheme scheme;
  SimSettings sim;
  OptimizeSettings optimize;
  OutputSettings output;

  bool operator==(const ExperimentConfig&) const = default;

  SimulationSetup setup() const {
    return {dot, sim.frame, {sim.dt_fs, sim.record_stride, sim.max_norm_drift}, {}};
  }

  SearchSpace search_space() const { return {scheme, optimize.axes}; }
};

struct LoadedConfig {
  ExperimentConfig config;
  std::vector<std::string> log;  // defaults applied, overrides, warnings
};

/// Rotating-frame steps must resolve the narrowest pulse with >= 200 points.
inline constexpr double kMinStepsPerWidth = 200.0;

namespace detail {

/// Walks a raw JSON tree while tracking the dotted path, recording defaults
/// and rejecting keys nobody asked for.
class Reader {
 public:
  Reader(const Json& node, std::string path, std::vector<std::string>& log)
      : node_(node), path_(std::move(path)), log_(log) {
    if (!node_.is_object()) throw Error(ErrorCode::config_invalid, "expected an object", path_);
  }

  void allow_only(std::initializer_list<std::string_view> keys) const {
    for (const auto& [key, value] : node_.items()) {
      bool known = false;
      for (auto k : keys) known = known || key == k;
      if (!known) throw Error(ErrorCode::config_unknown_key, "unknown key '" + key + "'", at(key));
    }
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  std::string at(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  Reader child(const std::string& key) const {
    static const Json empty = Json::object();
    return Reader(has(key) ? node_.at(key) : empty, at(key), log_);
  }

  const Json& raw(const std::string& key) const { return node_.at(key); }

  template <class T>
  T get(const std::string& key, T fallback) const {
    if (!has(key)) {
      log_.push_back("default " + at(key) + " = " + Json(fallback).dump());
      return fallback;
    }
    return convert<T>(node_.at(key), at(key));
  }

  /// Value with a fallback computed only when the key is missing.
  template <class T, class F>
  T get_or(const std::string& key, F&& fallback) const {
    if (has(key)) return convert<T>(node_.at(key), at(key));
    T value = fallback();
    log_.push_back("default " + at(key) + " = " + Json(value).dump());
    return value;
  }

  template <class T>
  static T convert(const Json& value, const std::string& field) {
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!value.is_number()) throw Error(ErrorCode::config_invalid, "expected a number", field);
      } else if constexpr (std::is_integral_v<T>) {
        if (!value.is_number_integer())
          throw Error(ErrorCode::config_invalid, "expected an integer", field);
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!value.is_string()) throw Error(ErrorCode::config_invalid, "expected a string", field);
      }
      return value.get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::config_invalid, e.what(), field);
    }
  }

 private:
  const Json& node_;
  std::string path_;
  std::vector<std::string>& log_;
};

/// Re-raises module validation failures as config-invalid, keeping the field.
template <class F>
void as_config_error(F&& check) {
  try {
    check();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::invalid_argument || e.code() == ErrorCode::invalid_configuration)
      throw Error(ErrorCode::config_invalid, e.what(), e.field());
    throw;
  }
}

inline FrameKind parse_frame(const std::string& s, const std::string& field) {
  if (s == "rotating") return FrameKind::rotating;
  if (s == "lab") return FrameKind::lab;
  throw Error(ErrorCode::config_invalid, "frame must be 'rotating' or 'lab'", field);
}

inline SchemeKind parse_scheme_kind(const std::string& s, const std::string& field) {
  if (s == "sequential") return SchemeKind::sequential;
  if (s == "concurrent") return SchemeKind::concurrent;
  throw Error(ErrorCode::config_invalid, "scheme kind must be 'sequential' or 'concurrent'",
              field);
}

/// Default search box: amplitudes 0.25x..2.5x their pi-area guesses and the
/// full delay range the scheme allows (concurrent stops at 0.99 FWHM).
inline std::vector<Axis> default_axes(const PulseScheme& s, const DotParameters& dot) {
  const double tau = s.max_width_fs();
  const double a1 = pi_area_amplitude(s.pulse1.width_fs, ground_exciton_bright_coupling(dot));
  const double a2 = pi_area_amplitude(s.pulse2.width_fs, exciton_biexciton_bright_coupling(dot));
  Axis delay = s.kind == SchemeKind::sequential
                   ? Axis{FreeParameter::delay, kSequentialMinSeparation * tau, 4.0 * tau}
                   : Axis{FreeParameter::delay, -0.99 * tau, 0.99 * tau};
  return {{FreeParameter::amplitude1, 0.25 * a1, 2.5 * a1},
          {FreeParameter::amplitude2, 0.25 * a2, 2.5 * a2},
          delay};
}

inline Json axes_to_json(const std::vector<Axis>& axes) {
  Json out = Json::array();
  for (const auto& a : axes)
    out.push_back({{"parameter", to_string(a.parameter)}, {"lower", a.lower}, {"upper", a.upper}});
  return out;
}

}  // namespace detail

/// Resolves a raw JSON document into a validated config. `log` receives one
/// line per default applied and per warning.
inline ExperimentConfig resolve_config(const Json& raw, std::vector<std::string>& log) {
  using detail::Reader;
  Reader root(raw, "", log);
  root.allow_only({"dot", "basis", "scheme", "sim", "optimize", "output"});

  ExperimentConfig c;

  Reader basis = root.child("basis");
  basis.allow_only({"n_levels"});
  c.n_levels = basis.get<int>("n_levels", 2);
  if (c.n_levels < 1)
    throw Error(ErrorCode::config_invalid, "n_levels must be >= 1", "basis.n_levels");

  Reader dot = root.child("dot");
  dot.allow_only({"omega1_meV", "level_offsets_meV", "binding_energy_meV", "dipoles",
                  "biexciton_dipole_ratio", "gamma_per_ns"});
  const bool have_defaults = c.n_levels <= 2;
  const DotParameters base = have_defaults ? default_dot_parameters(c.n_levels) : DotParameters{};
  c.dot.omega1_meV = dot.get("omega1_meV", base.omega1_meV);
  for (const char* key : {"level_offsets_meV", "dipoles"})
    if (!have_defaults && !dot.has(key))
      throw Error(ErrorCode::config_invalid,
                  "no default exists for n_levels > 2; give one entry per level", dot.at(key));
  c.dot.level_offsets_meV = dot.get("level_offsets_meV", base.level_offsets_meV);
  c.dot.dipoles = dot.get("dipoles", base.dipoles);
  c.dot.binding_energy_meV = dot.get("binding_energy_meV", base.binding_energy_meV);
  c.dot.biexciton_dipole_ratio = dot.get("biexciton_dipole_ratio", base.biexciton_dipole_ratio);
  c.dot.gamma_per_ns = dot.get("gamma_per_ns", base.gamma_per_ns);
  detail::as_config_error([&] {
    validate(c.dot);
    detail::require(c.dot.n_levels() == c.n_levels,
                    "level_offsets_meV needs one entry per exciton level",
                    "dot.level_offsets_meV");
  });

  Reader scheme = root.child("scheme");
  scheme.allow_only({"kind", "pulse1", "pulse2"});
  c.scheme.kind = detail::parse_scheme_kind(scheme.get<std::string>("kind", "sequential"),
                                            scheme.at("kind"));
  Reader p1 = scheme.child("pulse1");
  Reader p2 = scheme.child("pulse2");
  for (const auto* p : {&p1, &p2})
    p->allow_only({"amplitude_meV", "center_fs", "width_fs", "detuning_meV", "phase_rad"});
  auto& g1 = c.scheme.pulse1;
  auto& g2 = c.scheme.pulse2;
  g1.width_fs = p1.get("width_fs", 1000.0);
  g2.width_fs = p2.get("width_fs", 1000.0);
  detail::as_config_error([&] {
    detail::require(g1.width_fs > 0, "width must be positive", "scheme.pulse1.width_fs");
    detail::require(g2.width_fs > 0, "width must be positive", "scheme.pulse2.width_fs");
  });
  g1.amplitude_meV = p1.get_or<double>("amplitude_meV", [&] {
    return pi_area_amplitude(g1.width_fs, ground_exciton_bright_coupling(c.dot));
  });
  g2.amplitude_meV = p2.get_or<double>("amplitude_meV", [&] {
    return pi_area_amplitude(g2.width_fs, exciton_biexciton_bright_coupling(c.dot));
  });
  g1.center_fs = p1.get("center_fs", 0.0);
  g2.center_fs = p2.get_or<double>("center_fs", [&] {
    return c.scheme.kind == SchemeKind::sequential
               ? g1.center_fs + kSequentialDefaultSeparation * c.scheme.max_width_fs()
               : g1.center_fs;
  });
  g1.carrier_meV = c.dot.omega1_meV + p1.get("detuning_meV", 0.0);
  g2.carrier_meV = c.dot.omega1_meV + p2.get("detuning_meV", -c.dot.binding_energy_meV);
  g1.phase_rad = p1.get("phase_rad", 0.0);
  g2.phase_rad = p2.get("phase_rad", 0.0);
  detail::as_config_error([&] { validate(c.scheme, c.dot); });
  for (auto& w : width_warnings(c.scheme, c.dot)) log.push_back("warning: " + w);

  Reader sim = root.child("sim");
  sim.allow_only({"dt_fs", "record_stride", "frame", "max_norm_drift"});
  c.sim.frame = detail::parse_frame(sim.get<std::string>("frame", "rotating"), sim.at("frame"));
  c.sim.dt_fs = sim.get("dt_fs", default_dt(c.sim.frame));
  c.sim.record_stride = sim.get("record_stride", 10);
  c.sim.max_norm_drift = sim.get("max_norm_drift", default_norm_drift(c.sim.frame));
  if (!(c.sim.dt_fs > 0))
    throw Error(ErrorCode::config_invalid, "dt must be positive", "sim.dt_fs");
  const double narrowest = std::min(g1.width_fs, g2.width_fs);
  if (c.sim.frame == FrameKind::rotating && c.sim.dt_fs > narrowest / kMinStepsPerWidth)
    throw Error(ErrorCode::config_invalid,
                "rotating-frame dt must not exceed the narrowest width / 200", "sim.dt_fs");
  if (c.sim.record_stride < 1)
    throw Error(ErrorCode::config_invalid, "record_stride must be >= 1", "sim.record_stride");
  if (!(c.sim.max_norm_drift > 0))
    throw Error(ErrorCode::config_invalid, "max_norm_drift must be positive",
                "sim.max_norm_drift");

  Reader opt = root.child("optimize");
  opt.allow_only({"axes", "resolution", "grid_cap", "penalty", "p_min", "ground_weight",
                  "max_evaluations", "tolerance", "initial_step", "starts"});
  if (opt.has("axes")) {
    const Json& axes = opt.raw("axes");
    if (!axes.is_array() || axes.empty())
      throw Error(ErrorCode::config_invalid, "axes must be a non-empty array", opt.at("axes"));
    for (std::size_t i = 0; i < axes.size(); ++i) {
      Reader a(axes[i], opt.at("axes") + "[" + std::to_string(i) + "]", log);
      a.allow_only({"parameter", "lower", "upper"});
      for (const char* key : {"parameter", "lower", "upper"})
        if (!a.has(key)) throw Error(ErrorCode::config_invalid, "missing key", a.at(key));
      Axis axis;
      detail::as_config_error([&] {
        try {
          axis.parameter = parse_free_parameter(Reader::convert<std::string>(a.raw("parameter"),
                                                                             a.at("parameter")));
        } catch (const Error& e) {
          throw Error(e.code(), e.what(), a.at("parameter"));
        }
      });
      axis.lower = Reader::convert<double>(a.raw("lower"), a.at("lower"));
      axis.upper = Reader::convert<double>(a.raw("upper"), a.at("upper"));
      c.optimize.axes.push_back(axis);
    }
  } else {
    c.optimize.axes = detail::default_axes(c.scheme, c.dot);
    log.push_back("default optimize.axes = " + detail::axes_to_json(c.optimize.axes).dump());
  }
  c.optimize.resolution =
      opt.get("resolution", std::vector<int>(c.optimize.axes.size(), 7));
  c.optimize.grid_cap = opt.get<std::size_t>("grid_cap", 10000);
  c.optimize.objective.penalty = opt.get("penalty", 10.0);
  c.optimize.objective.p_min = opt.get("p_min", 0.98);
  c.optimize.objective.ground_weight = opt.get("ground_weight", 1.0);
  c.optimize.max_evaluations = opt.get("max_evaluations", 500);
  c.optimize.tolerance = opt.get("tolerance", 1e-4);
  c.optimize.initial_step = opt.get("initial_step", 0.1);
  c.optimize.starts = opt.get("starts", 3);
  detail::as_config_error([&] {
    c.search_space().validate();
    using detail::require;
    require(c.optimize.resolution.size() == c.optimize.axes.size(),
            "resolution needs one entry per axis", "optimize.resolution");
    for (int r : c.optimize.resolution)
      require(r >= 2, "resolution must be >= 2 per axis", "optimize.resolution");
    require(c.optimize.objective.penalty >= 0, "penalty must be non-negative", "optimize.penalty");
    require(c.optimize.objective.p_min >= 0 && c.optimize.objective.p_min <= 1,
            "p_min must lie in [0, 1]", "optimize.p_min");
    require(c.optimize.objective.ground_weight >= 0, "ground_weight must be non-negative",
            "optimize.ground_weight");
    require(c.optimize.max_evaluations > static_cast<int>(c.optimize.axes.size()),
            "max_evaluations must exceed the number of axes", "optimize.max_evaluations");
    require(c.optimize.tolerance > 0, "tolerance must be positive", "optimize.tolerance");
    require(c.optimize.initial_step > 0 && c.optimize.initial_step <= 0.5,
            "initial_step must lie in (0, 0.5]", "optimize.initial_step");
    require(c.optimize.starts >= 1, "starts must be >= 1", "optimize.starts");
  });

  Reader out = root.child("output");
  out.allow_only({"directory", "formats"});
  c.output.directory = out.get<std::string>("directory", "out");
  const auto formats = out.get("formats", std::vector<std::string>{"csv", "json"});
  c.output.csv = c.output.json = false;
  for (const auto& f : formats) {
    if (f == "csv") c.output.csv = true;
    else if (f == "json") c.output.json = true;
    else throw Error(ErrorCode::config_invalid, "formats may contain only csv and json",
                     "output.formats");
  }
  return c;
}

inline Json to_json(const GaussianPulse& p, double omega1_meV) {
  return {{"amplitude_meV", p.amplitude_meV},
          {"center_fs", p.center_fs},
          {"width_fs", p.width_fs},
          {"detuning_meV", p.carrier_meV - omega1_meV},
          {"phase_rad", p.phase_rad}};
}

inline Json to_json(const PulseScheme& s, double omega1_meV) {
  return {{"kind", to_string(s.kind)},
          {"pulse1", to_json(s.pulse1, omega1_meV)},
          {"pulse2", to_json(s.pulse2, omega1_meV)}};
}

/// Fully resolved config; load(to_json(c)) == c.
inline Json to_json(const ExperimentConfig& c) {
  Json j;
  j["dot"] = {{"omega1_meV", c.dot.omega1_meV},
              {"level_offsets_meV", c.dot.level_offsets_meV},
              {"binding_energy_meV", c.dot.binding_energy_meV},
              {"dipoles", c.dot.dipoles},
              {"biexciton_dipole_ratio", c.dot.biexciton_dipole_ratio},
              {"gamma_per_ns", c.dot.gamma_per_ns}};
  j["basis"] = {{"n_levels", c.n_levels}};
  j["scheme"] = to_json(c.scheme, c.dot.omega1_meV);
  j["sim"] = {{"dt_fs", c.sim.dt_fs},
              {"record_stride", c.sim.record_stride},
              {"frame", to_string(c.sim.frame)},
              {"max_norm_drift", c.sim.max_norm_drift}};
  j["optimize"] = {{"axes", detail::axes_to_json(c.optimize.axes)},
                   {"resolution", c.optimize.resolution},
                   {"grid_cap", c.optimize.grid_cap},
                   {"penalty", c.optimize.objective.penalty},
                   {"p_min", c.optimize.objective.p_min},
                   {"ground_weight", c.optimize.objective.ground_weight},
                   {"max_evaluations", c.optimize.max_evaluations},
                   {"tolerance", c.optimize.tolerance},
                   {"initial_step", c.optimize.initial_step},
                   {"starts", c.optimize.starts}};
  std::vector<std::string> formats;
  if (c.output.csv) formats.push_back("csv");
  if (c.output.json) formats.push_back("json");
  j["output"] = {{"directory", c.output.directory}, {"formats", formats}};
  return j;
}

/// Applies one `key.path=value` assignment to a raw config document. The
/// value is parsed as JSON when possible and taken as a string otherwise.
/// `scheme=<kind>` is shorthand for `scheme.kind=<kind>`.
inline void apply_override(Json& raw, std::string_view assignment, std::vector<std::string>& log) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw Error(ErrorCode::config_invalid, "override must look like key=value",
                std::string(assignment));
  std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  if (key == "scheme") key = "scheme.kind";

  Json value;
  try {
    value = Json::parse(text);
  } catch (const nlohmann::json::exception&) {
    value = text;
  }

  Json* node = &raw;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (part.empty()) throw Error(ErrorCode::config_invalid, "empty override path segment", key);
    if (!node->is_object()) throw Error(ErrorCode::config_invalid, "override path crosses a value", key);
    if (dot == std::string::npos) {
      (*node)[part] = value;
      break;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = Json::object();
    start = dot + 1;
  }
  log.push_back("override " + key + " = " + value.dump());
}

inline Json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open config file", path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::config_syntax, e.what(), path.string());
  }
}

/// Loads a JSON config (or the all-default config when `path` is empty),
/// applies overrides in order (last write wins) and resolves defaults.
inline LoadedConfig load_config(const std::filesystem::path& path,
                                const std::vector<std::string>& overrides = {}) {
  LoadedConfig loaded;
  Json raw = path.empty() ? Json::object() : parse_json_file(path);
  if (!raw.is_object()) throw Error(ErrorCode::config_syntax, "config root must be an object",
                                    path.string());
  for (const auto& o : overrides) apply_override(raw, o, loaded.log);
  loaded.config = resolve_config(raw, loaded.log);
  return loaded;
}

inline LoadedConfig load_config_json(const Json& raw, const std::vector<std::string>& overrides = {}) {
  LoadedConfig loaded;
  Json copy = raw;
  for (const auto& o : overrides) apply_override(copy, o, loaded.log);
  loaded.config = resolve_config(copy, loaded.log);
  return loaded;
}

/// Lowercase hex SHA-256 of `data`.
inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::io_error, "sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

/// Everything a verb may emit. Null / empty members are skipped.
struct RunArtifacts {
  std::string verb;
  const Trajectory* trajectory = nullptr;
  const HamiltonianModel* model = nullptr;
  std::optional<Json> summary;
  std::optional<std::string> landscape_csv;
  std::optional<Json> optimum;
};

struct ManifestEntry {
  std::string path;
  std::size_t bytes = 0;
  std::string sha256;
};

struct Manifest {
  std::vector<ManifestEntry> files;  // excludes manifest.json itself
  std::filesystem::path manifest_path;
};

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot open output file", path.string());
  out << content;
  if (!out) throw Error(ErrorCode::io_error, "write failed", path.string());
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

/// Writes every artifact into `directory` plus manifest.json listing file
/// hashes and the resolved config. Only the manifest carries a timestamp.
inline Manifest write_outputs(const RunArtifacts& artifacts, const ExperimentConfig& config,
                              const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create output directory: " + ec.message(),
                      directory.string());

  Manifest manifest;
  auto emit = [&](const std::string& name, const std::string& content) {
    detail::write_file(directory / name, content);
    manifest.files.push_back({name, content.size(), sha256_hex(content)});
  };

  if (config.output.csv && artifacts.trajectory && artifacts.model) {
    std::ostringstream os;
    write_trajectory_csv(os, *artifacts.trajectory, *artifacts.model);
    emit("trajectory.csv", os.str());
  }
  if (config.output.csv && artifacts.landscape_csv) emit("landscape.csv", *artifacts.landscape_csv);
  if (config.output.json && artifacts.summary) emit("summary.json", artifacts.summary->dump(2) + "\n");
  if (config.output.json && artifacts.optimum) emit("optimum.json", artifacts.optimum->dump(2) + "\n");

  Json files = Json::array();
  for (const auto& f : manifest.files)
    files.push_back({{"path", f.path}, {"bytes", f.bytes}, {"sha256", f.sha256}});
  Json m;
  m["verb"] = artifacts.verb;
  m["generated_at"] = detail::utc_timestamp();
  m["files"] = std::move(files);
  m["config"] = to_json(config);
  manifest.manifest_path = directory / "manifest.json";
  detail::write_file(manifest.manifest_path, m.dump(2) + "\n");
  return manifest;
}

}  // namespace biex
