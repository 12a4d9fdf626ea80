#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "biex/error.hpp"
#include "biex/levels.hpp"
#include "biex/pulses.hpp"

namespace biex {

using Matrix = Eigen::MatrixXcd;

/// Adds `value` to a single matrix element without touching its mirror.
/// Only used to check that the Hermiticity diagnostic catches defects.
struct ElementCorruption {
  std::size_t row = 0;
  std::size_t col = 0;
  std::complex<double> value{};
};

struct ModelOptions {
  /// When false, exciton -> biexciton edges are dropped (ground-exciton
  /// two-level checks).
  bool couple_biexcitons = true;
  std::optional<ElementCorruption> corruption;
};

/// H(t) over a LevelBasis for a given pulse scheme. Immutable after
/// construction; evaluate() is pure.
class HamiltonianModel {
 public:
  HamiltonianModel(LevelBasis basis, DotParameters params, PulseScheme scheme,
                   Frame frame, ModelOptions options = {})
      : basis_(std::move(basis)),
        params_(std::move(params)),
        scheme_(scheme),
        frame_(frame),
        options_(options) {
    validate(params_);
    detail::require(params_.n_levels() == basis_.n_levels(),
                    "basis and dot parameters disagree on n_levels", "basis.n_levels");
    if (frame_.kind == FrameKind::rotating)
      detail::require(frame_.reference_meV == params_.omega1_meV,
                      "rotating frame must rotate at omega1", "sim.frame",
                      ErrorCode::invalid_configuration);
    if (options_.corruption)
      detail::require(options_.corruption->row < basis_.size() &&
                          options_.corruption->col < basis_.size(),
                      "corruption index out of range");

    diagonal_.resize(basis_.size());
    const double shift = frame_.kind == FrameKind::rotating ? frame_.reference_meV : 0.0;
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      diagonal_[i] = bare_energy(basis_.state(i)) - basis_.exciton_count(i) * shift;
    }
    for (auto& e : allowed_transitions(basis_, params_)) {
      if (!options_.couple_biexcitons && e.to.kind() == StateKind::biexciton) continue;
      edges_.push_back(std::move(e));
    }
  }

  /// Convenience: rotating frame at omega_1.
  static HamiltonianModel rotating(LevelBasis basis, DotParameters params,
                                   PulseScheme scheme, ModelOptions options = {}) {
    const double ref = params.omega1_meV;
    return HamiltonianModel(std::move(basis), std::move(params), scheme,
                            Frame::rotating(ref), options);
  }

  const LevelBasis& basis() const { return basis_; }
  const DotParameters& params() const { return params_; }
  const PulseScheme& scheme() const { return scheme_; }
  const Frame& frame() const { return frame_; }
  const ModelOptions& options() const { return options_; }
  const std::vector<double>& diagonal() const { return diagonal_; }
  const std::vector<Transition>& transitions() const { return edges_; }
  std::size_t dimension() const { return basis_.size(); }

  /// Writes H(t) in meV into `h`, which must already be dimension x dimension.
  void evaluate_into(double t_fs, Matrix& h) const {
    h.setZero();
    for (std::size_t i = 0; i < diagonal_.size(); ++i)
      h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = diagonal_[i];
    const DrivePair drive = field(scheme_, t_fs, frame_);
    for (const auto& e : edges_) {
      const auto coupling = -e.dipole * drive[e.polarization];
      const auto u = static_cast<Eigen::Index>(e.to_index);
      const auto l = static_cast<Eigen::Index>(e.from_index);
      h(u, l) += coupling;
      h(l, u) += std::conj(coupling);
    }
    if (options_.corruption) {
      const auto& c = *options_.corruption;
      h(static_cast<Eigen::Index>(c.row), static_cast<Eigen::Index>(c.col)) += c.value;
    }
  }

  Matrix evaluate(double t_fs) const {
    const auto n = static_cast<Eigen::Index>(dimension());
    Matrix h(n, n);
    evaluate_into(t_fs, h);
    return h;
  }

 private:
  double bare_energy(const StateLabel& s) const {
    switch (s.kind()) {
      case StateKind::ground: return 0.0;
      case StateKind::exciton: return params_.exciton_energy(s.first().level);
      case StateKind::biexciton:
        return params_.exciton_energy(s.first().level) +
               params_.exciton_energy(s.second().level) - params_.binding_energy_meV;
    }
    return 0.0;
  }

  LevelBasis basis_;
  DotParameters params_;
  PulseScheme scheme_;
  Frame frame_;
  ModelOptions options_;
  std::vector<double> diagonal_;
  std::vector<Transition> edges_;
};

/// max |H - H^dagger| over all entries.
inline double hermiticity_defect(const HamiltonianModel& model, double t_fs) {
  const Matrix h = model.evaluate(t_fs);
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

/// Row-major dump of H(t) as [re, im] pairs for cross-implementation diffs.
inline nlohmann::ordered_json hamiltonian_to_json(const HamiltonianModel& model,
                                                  double t_fs) {
  const Matrix h = model.evaluate(t_fs);
  nlohmann::ordered_json out;
  out["t_fs"] = t_fs;
  out["frame"] = to_string(model.frame().kind);
  out["dimension"] = model.dimension();
  out["labels"] = model.basis().labels();
  auto data = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < h.rows(); ++r)
    for (Eigen::Index c = 0; c < h.cols(); ++c)
      data.push_back({h(r, c).real(), h(r, c).imag()});
  out["data_meV"] = std::move(data);
  return out;
}

}  // namespace biex
