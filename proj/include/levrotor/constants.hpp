#pragma once

#include <numbers>

/// Physical constants in SI units.
namespace levrotor::constants {

inline constexpr double pi = std::numbers::pi;

/// Standard gravity used throughout [m/s^2].
inline constexpr double g = 9.81;
/// Boltzmann constant (exact, SI 2019) [J/K].
inline constexpr double k_B = 1.380649e-23;
/// Vacuum permeability, 4*pi*1e-7 [H/m].
inline constexpr double mu_0 = 4.0e-7 * pi;
/// Atomic mass unit [kg].
inline constexpr double amu = 1.66053906660e-27;
/// Reduced Planck constant [J*s].
inline constexpr double hbar = 1.054571817e-34;

}  // namespace levrotor::constants
