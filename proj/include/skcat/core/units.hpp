#pragma once

#include <string>

#include "skcat/core/types.hpp"

namespace skcat {

// CODATA 2018 exact or recommended values, SI units.
namespace constants {
inline constexpr double e_charge = 1.602176634e-19;   // C
inline constexpr double h = 6.62607015e-34;           // J s
inline constexpr double hbar = 1.054571817e-34;       // J s
inline constexpr double k_b = 1.380649e-23;           // J / K
inline constexpr double k_coulomb = 8.9875517923e9;   // N m^2 / C^2
// Electron gyromagnetic ratio in s^-1 T^-1.  Used as a literal numeral in the
// electron Zeeman term, the same way nuclear gyromagnetic ratios are.
inline constexpr double gamma_e = 1.76085963023e11;
inline constexpr double barn = 1e-28;                 // m^2
inline constexpr double angstrom = 1e-10;             // m
}  // namespace constants

// How Hamiltonian coefficients become phases.
//
// paper_literal: coefficients are the quoted frequency numerals and the phase
//   accumulated over a time t is coefficient * t.  Energies convert to
//   coefficients through hbar.
// angular: the same numerals are cycle frequencies, so phase is
//   2 pi * coefficient * t, and energies convert through h.
//
// Thermal occupations always use h * f regardless of this setting.
enum class Convention { paper_literal, angular };

inline double phase_factor(Convention c) {
  return c == Convention::angular ? 2.0 * pi : 1.0;
}

inline double energy_to_coefficient(double energy_joule, Convention c) {
  return c == Convention::angular ? energy_joule / constants::h
                                  : energy_joule / constants::hbar;
}

inline std::string to_string(Convention c) {
  return c == Convention::angular ? "angular" : "paper-literal";
}

inline Convention convention_from_string(const std::string& s) {
  if (s == "paper-literal") return Convention::paper_literal;
  if (s == "angular") return Convention::angular;
  throw DomainError("unknown convention '" + s + "'");
}

}  // namespace skcat
