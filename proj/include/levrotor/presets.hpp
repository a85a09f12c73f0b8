#pragma once

#include <vector>

#include "levrotor/levitation.hpp"
#include "levrotor/magnetostatics.hpp"

/// Reference rotor setup: a column of two D8 x H10 mm N52 cylinders
/// (1480 mT, up) nested inside five OD19 x ID8.1 x H4 mm N40 rings
/// (1300 mT, down), top face at z = 0, and a pyrolytic graphite disk.
namespace levrotor::presets {

inline MagnetStack reference_stack() {
  std::vector<MagnetSpec> magnets;
  for (int i = 0; i < 2; ++i) {
    magnets.push_back({MagnetShape::Cylinder, 4.0e-3, 0.0, 10.0e-3, -20.0e-3 + 10.0e-3 * i, 1.480, +1});
  }
  for (int i = 0; i < 5; ++i) {
    magnets.push_back({MagnetShape::Ring, 9.5e-3, 4.05e-3, 4.0e-3, -20.0e-3 + 4.0e-3 * i, 1.300, -1});
  }
  return MagnetStack(std::move(magnets));
}

inline DiskSpec reference_disk() {
  DiskSpec d;
  d.radius = 5.01e-3;
  d.thickness = 1.12e-3;
  d.mass = 191e-6;
  d.chi_parallel = 85e-6;
  d.chi_perp = 530e-6;
  d.sigma_parallel = 130000.0;
  d.sigma_perp = 200.0;
  return d;
}

/// Measured trap values, used where a measurement rather than a simulated
/// quantity is called for.
inline constexpr double measured_gap = 0.82e-3;            // [m]
inline constexpr double measured_omega_V_hz = 18.9;        // [Hz]
inline constexpr double measured_omega_L_hz = 6.0;         // [Hz]

}  // namespace levrotor::presets
