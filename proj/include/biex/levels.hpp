#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "biex/error.hpp"

namespace biex {

/// Circular polarization of a photon / spin projection of an exciton.
enum class Spin : std::uint8_t { plus, minus };

constexpr Spin operator-(Spin s) {
  return s == Spin::plus ? Spin::minus : Spin::plus;
}

constexpr char spin_char(Spin s) { return s == Spin::plus ? '+' : '-'; }

/// One exciton: confinement level k >= 1 and the spin of the creating photon.
/// Ordered by level, then spin (plus before minus).
struct Exciton {
  int level = 1;
  Spin spin = Spin::plus;

  auto operator<=>(const Exciton&) const = default;
};

enum class StateKind : std::uint8_t { ground, exciton, biexciton };

/// Label of a basis state. Biexcitons always hold their two constituents in
/// canonical order so |j^s,k^s'> and |k^s',j^s> compare equal.
class StateLabel {
 public:
  static StateLabel ground() { return StateLabel(StateKind::ground, {}, {}); }

  static StateLabel exciton(int level, Spin spin) {
    detail::require(level >= 1, "exciton level must be >= 1");
    return StateLabel(StateKind::exciton, {level, spin}, {});
  }

  static StateLabel biexciton(Exciton a, Exciton b) {
    detail::require(a.level >= 1 && b.level >= 1, "exciton level must be >= 1");
    detail::require(a != b, "biexciton constituents must be distinct");
    if (b < a) std::swap(a, b);
    return StateLabel(StateKind::biexciton, a, b);
  }

  StateKind kind() const { return kind_; }
  const Exciton& first() const { return first_; }
  const Exciton& second() const { return second_; }

  int exciton_count() const {
    switch (kind_) {
      case StateKind::ground: return 0;
      case StateKind::exciton: return 1;
      case StateKind::biexciton: return 2;
    }
    return 0;
  }

  bool contains(const Exciton& x) const {
    if (kind_ == StateKind::exciton) return first_ == x;
    if (kind_ == StateKind::biexciton) return first_ == x || second_ == x;
    return false;
  }

  int max_level() const {
    switch (kind_) {
      case StateKind::ground: return 0;
      case StateKind::exciton: return first_.level;
      case StateKind::biexciton: return std::max(first_.level, second_.level);
    }
    return 0;
  }

  auto operator<=>(const StateLabel&) const = default;

 private:
  StateLabel(StateKind kind, Exciton first, Exciton second)
      : kind_(kind), first_(first), second_(second) {}

  StateKind kind_;
  Exciton first_;
  Exciton second_;
};

/// "G", "X1+", "B(1+,1-)". Used as CSV column names and JSON keys.
inline std::string to_string(const StateLabel& label) {
  auto exciton = [](const Exciton& x) {
    return std::to_string(x.level) + spin_char(x.spin);
  };
  switch (label.kind()) {
    case StateKind::ground: return "G";
    case StateKind::exciton: return "X" + exciton(label.first());
    case StateKind::biexciton:
      return "B(" + exciton(label.first()) + "," + exciton(label.second()) + ")";
  }
  return "?";
}

/// Ordered basis: ground, excitons by (level, spin), then biexcitons in
/// lexicographic order of their canonical constituent pairs.
class LevelBasis {
 public:
  explicit LevelBasis(int n_levels) : n_levels_(n_levels) {
    detail::require(n_levels >= 1, "n_levels must be >= 1", "basis.n_levels");
    std::vector<Exciton> excitons;
    for (int k = 1; k <= n_levels; ++k) {
      excitons.push_back({k, Spin::plus});
      excitons.push_back({k, Spin::minus});
    }
    states_.push_back(StateLabel::ground());
    for (const auto& x : excitons) states_.push_back(StateLabel::exciton(x.level, x.spin));
    for (std::size_t i = 0; i < excitons.size(); ++i)
      for (std::size_t j = i + 1; j < excitons.size(); ++j)
        states_.push_back(StateLabel::biexciton(excitons[i], excitons[j]));
    for (std::size_t i = 0; i < states_.size(); ++i) index_.emplace(states_[i], i);
  }

  int n_levels() const { return n_levels_; }
  std::size_t size() const { return states_.size(); }
  const std::vector<StateLabel>& states() const { return states_; }
  const StateLabel& state(std::size_t i) const { return states_.at(i); }
  int exciton_count(std::size_t i) const { return states_.at(i).exciton_count(); }

  bool contains(const StateLabel& label) const { return index_.contains(label); }

  std::size_t index_of(const StateLabel& label) const {
    auto it = index_.find(label);
    if (it == index_.end())
      throw Error(ErrorCode::invalid_argument,
                  "state " + to_string(label) + " is not in the basis");
    return it->second;
  }

  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    out.reserve(states_.size());
    for (const auto& s : states_) out.push_back(to_string(s));
    return out;
  }

  /// Closed-form basis dimension for n levels.
  static constexpr std::size_t expected_size(int n_levels) {
    const auto n = static_cast<std::size_t>(n_levels);
    return 1 + 2 * n + n * (2 * n - 1);
  }

 private:
  int n_levels_;
  std::vector<StateLabel> states_;
  std::map<StateLabel, std::size_t> index_;
};

inline LevelBasis build_basis(int n_levels) { return LevelBasis(n_levels); }

/// Physical constants of the dot. Dipoles are dimensionless multiples of
/// d_1 = 1; drive amplitudes therefore carry the coupling energy d_1 * E.
struct DotParameters {
  double omega1_meV = 1300.0;
  std::vector<double> level_offsets_meV{0.0, 40.0};
  double binding_energy_meV = 4.0;
  std::vector<double> dipoles{1.0, std::sqrt(2.0)};
  double biexciton_dipole_ratio = 0.8;
  double gamma_per_ns = 1.0;

  int n_levels() const { return static_cast<int>(level_offsets_meV.size()); }

  /// hbar * omega_k, measured from the ground state.
  double exciton_energy(int level) const {
    return omega1_meV + level_offsets_meV.at(static_cast<std::size_t>(level - 1));
  }

  double ground_exciton_dipole(int level) const {
    return dipoles.at(static_cast<std::size_t>(level - 1));
  }

  /// Dipole for adding an exciton at `added_level` on top of an existing one.
  double exciton_biexciton_dipole(int added_level) const {
    return std::sqrt(biexciton_dipole_ratio) * ground_exciton_dipole(added_level);
  }

  bool operator==(const DotParameters&) const = default;
};

/// Default parameters truncated to n_levels; only n_levels <= 2 has defaults.
inline DotParameters default_dot_parameters(int n_levels = 2) {
  detail::require(n_levels >= 1 && n_levels <= 2,
                  "default dot parameters exist only for n_levels 1 or 2",
                  "basis.n_levels");
  DotParameters p;
  p.level_offsets_meV.resize(static_cast<std::size_t>(n_levels));
  p.dipoles.resize(static_cast<std::size_t>(n_levels));
  return p;
}

/// Throws invalid-argument naming the offending config field.
inline void validate(const DotParameters& p) {
  using detail::require;
  require(std::isfinite(p.omega1_meV) && p.omega1_meV > 0,
          "omega1 must be positive", "dot.omega1_meV");
  require(!p.level_offsets_meV.empty(), "level_offsets must be non-empty",
          "dot.level_offsets_meV");
  require(p.level_offsets_meV.front() == 0.0, "level_offsets[0] must be 0",
          "dot.level_offsets_meV");
  for (std::size_t i = 1; i < p.level_offsets_meV.size(); ++i)
    require(p.level_offsets_meV[i] > p.level_offsets_meV[i - 1],
            "level_offsets must be strictly increasing", "dot.level_offsets_meV");
  require(p.dipoles.size() == p.level_offsets_meV.size(),
          "dipoles must have one entry per exciton level", "dot.dipoles");
  for (double d : p.dipoles)
    require(std::isfinite(d) && d > 0, "dipoles must be positive", "dot.dipoles");
  require(std::isfinite(p.binding_energy_meV) && p.binding_energy_meV > 0,
          "binding energy must be positive", "dot.binding_energy_meV");
  require(p.biexciton_dipole_ratio > 0 && p.biexciton_dipole_ratio <= 1,
          "biexciton dipole ratio must lie in (0, 1]", "dot.biexciton_dipole_ratio");
  require(std::isfinite(p.gamma_per_ns) && p.gamma_per_ns >= 0,
          "gamma must be non-negative", "dot.gamma_per_ns");
}

/// Dipole-allowed coupling between a lower and an upper state (exciton number
/// differs by one). The Hermitian conjugate is implied.
struct Transition {
  StateLabel from;  // lower
  StateLabel to;    // upper
  std::size_t from_index = 0;
  std::size_t to_index = 0;
  Spin polarization = Spin::plus;
  double dipole = 0.0;
};

/// Edges of the level diagram: ground -> k^s via sigma_s with d_k, and for
/// each biexciton one edge per constituent, where adding exciton k^s to an
/// existing j^s' uses sigma_s and sqrt(r) * d_k.
inline std::vector<Transition> allowed_transitions(const LevelBasis& basis,
                                                   const DotParameters& params) {
  detail::require(params.n_levels() == basis.n_levels(),
                  "basis and dot parameters disagree on n_levels");
  std::vector<Transition> edges;
  auto add = [&](const StateLabel& lower, const StateLabel& upper, Spin pol,
                 double dipole) {
    edges.push_back({lower, upper, basis.index_of(lower), basis.index_of(upper),
                     pol, dipole});
  };
  const auto ground = StateLabel::ground();
  for (const auto& s : basis.states())
    if (s.kind() == StateKind::exciton)
      add(ground, s, s.first().spin, params.ground_exciton_dipole(s.first().level));
  for (const auto& s : basis.states()) {
    if (s.kind() != StateKind::biexciton) continue;
    const auto& a = s.first();
    const auto& b = s.second();
    add(StateLabel::exciton(b.level, b.spin), s, a.spin,
        params.exciton_biexciton_dipole(a.level));
    add(StateLabel::exciton(a.level, a.spin), s, b.spin,
        params.exciton_biexciton_dipole(b.level));
  }
  return edges;
}

}  // namespace biex
