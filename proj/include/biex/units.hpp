#pragma once

#include <numbers>

namespace biex {

// All energies are in meV and all times in fs. Frequencies are stored as
// energies (hbar * omega) and converted with kHbar where a phase is needed.
inline constexpr double kHbar = 658.2119569;  // meV fs

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kLn2 = std::numbers::ln2;

/// Radiative rates are configured in 1/ns; the dynamics run in fs.
constexpr double per_ns_to_per_fs(double rate) { return rate * 1.0e-6; }

}  // namespace biex
