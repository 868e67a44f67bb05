#pragma once

namespace mtjsnn::constants {

// CODATA 2018 values. Fixed; not user-configurable.
inline constexpr double mu_B = 9.2740100783e-24;   // Bohr magneton [J/T]
inline constexpr double mu_0 = 1.25663706212e-6;   // vacuum permeability [T·m/A]
inline constexpr double hbar = 1.054571817e-34;    // reduced Planck constant [J·s]
inline constexpr double q_e = 1.602176634e-19;     // elementary charge [C]
inline constexpr double k_B = 1.380649e-23;        // Boltzmann constant [J/K]

// Electron gyromagnetic ratio, 2·mu_B·mu_0/hbar.  With H in A/m, gamma*H
// has units of 1/s.
inline constexpr double gamma_e = 2.0 * mu_B * mu_0 / hbar;

// Reference temperature the energy-barrier spec (in units of k_B·T) is
// quoted at.
inline constexpr double T_ref = 300.0;  // [K]

}  // namespace mtjsnn::constants
