#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "levrotor/constants.hpp"
#include "levrotor/error.hpp"
#include "levrotor/magnetostatics.hpp"
#include "levrotor/numerics.hpp"

namespace levrotor {

/// Rotor disk. Susceptibilities are stored as positive magnitudes; the
/// diamagnetic sign is applied in the energy density.
struct DiskSpec {
  double radius = 0.0;          // R [m]
  double thickness = 0.0;       // H [m]
  double mass = 0.0;            // M [kg]
  double chi_parallel = 0.0;    // in-plane |chi|
  double chi_perp = 0.0;        // c-axis |chi|
  double sigma_parallel = 0.0;  // [S/m]
  double sigma_perp = 0.0;      // [S/m]

  [[nodiscard]] double moment_of_inertia() const noexcept {
    return 0.5 * mass * radius * radius;
  }
  [[nodiscard]] double volume() const noexcept {
    return constants::pi * radius * radius * thickness;
  }

  void validate() const {
    if (!(radius > 0.0)) throw DomainError("disk: radius must be positive");
    if (!(thickness > 0.0)) throw DomainError("disk: thickness must be positive");
    if (!(thickness < radius)) throw DomainError("disk: thickness must be smaller than radius");
    if (!(mass > 0.0)) throw DomainError("disk: mass must be positive");
    if (!(chi_parallel >= 0.0) || !(chi_perp >= 0.0)) {
      throw DomainError("disk: susceptibility magnitudes must be non-negative");
    }
    if (!(sigma_parallel > 0.0) || !(sigma_perp > 0.0)) {
      throw DomainError("disk: conductivities must be positive");
    }
  }
};

/// Disk placement: lateral COM offset from the stack axis and the gap
/// between the stack top and the disk's bottom face.
struct Pose {
  double offset = 0.0;  // d [m]
  double gap = 0.0;     // h [m]
};

/// Tensor Gauss-Legendre orders for the disk volume integral.
struct EnergyQuadrature {
  std::size_t radial = 48;
  std::size_t axial = 16;
  std::size_t azimuthal = 32;
};

struct LevitationSolution {
  double h_V = 0.0;                  // [m]
  double omega_V = 0.0;              // [rad/s]
  double omega_L = 0.0;              // [rad/s]
  double curvature_vertical = 0.0;   // d2U/dh2 [J/m^2]
  double curvature_lateral = 0.0;    // d2U/dd2 [J/m^2]
};

/// Energy density of a linear anisotropic diamagnet (positive, ~|B|^2).
inline double diamagnetic_energy_density(const DiskSpec& disk, const FieldVector& b) {
  return (disk.chi_parallel * b.B_r * b.B_r + disk.chi_perp * b.B_z * b.B_z) /
         (2.0 * constants::mu_0);
}

namespace detail {

inline void check_pose(const Pose& pose) {
  if (!(pose.gap > 0.0)) {
    throw GeometryError("disk intersects the magnet stack (gap = " + std::to_string(pose.gap) +
                        " m)");
  }
  if (!std::isfinite(pose.offset)) throw DomainError("pose: offset must be finite");
}

/// Integrates f(rho_lab, z) over the disk face area at height z with the disk
/// centre displaced by `offset`. The integrand only depends on the lab radius,
/// so mirror symmetry in y halves the azimuthal range.
template <typename F>
double face_integral(const DiskSpec& disk, double offset, const EnergyQuadrature& q, F&& f) {
  const auto radial = map_rule(gauss_legendre(q.radial), 0.0, disk.radius);
  double total = 0.0;
  if (offset == 0.0) {
    for (const auto& [r, wr] : radial) total += wr * 2.0 * constants::pi * r * f(r);
    return total;
  }
  const auto az = map_rule(gauss_legendre(q.azimuthal), 0.0, constants::pi);
  for (const auto& [r, wr] : radial) {
    double ring = 0.0;
    for (const auto& [phi, wp] : az) {
      const double x = r * std::cos(phi) + offset;
      const double y = r * std::sin(phi);
      ring += wp * f(std::hypot(x, y));
    }
    total += wr * 2.0 * r * ring;
  }
  return total;
}

}  // namespace detail

/// Magnetic energy U_mag(d, h) of the disk in the stack field [J].
inline double magnetic_energy(const DiskSpec& disk, const MagnetStack& stack, const Pose& pose,
                              const EnergyQuadrature& q = {}) {
  detail::check_pose(pose);
  const double bottom = stack.top_z() + pose.gap;
  const auto axial = map_rule(gauss_legendre(q.axial), bottom, bottom + disk.thickness);
  double total = 0.0;
  for (const auto& [z, wz] : axial) {
    total += wz * detail::face_integral(disk, pose.offset, q, [&](double rho) {
               return diamagnetic_energy_density(disk, stack_field(stack, rho, z));
             });
  }
  return total;
}

/// U_mag + M g z_com, with z measured from the stack top.
inline double total_energy(const DiskSpec& disk, const MagnetStack& stack, const Pose& pose,
                           const EnergyQuadrature& q = {}) {
  return magnetic_energy(disk, stack, pose, q) +
         disk.mass * constants::g * (pose.gap + 0.5 * disk.thickness);
}

/// Magnetic lift F_z = -dU_mag/dh. Translating the disk vertically only
/// moves its end faces, so the volume derivative collapses to the difference
/// of the face integrals of the energy density (exact in z).
inline double vertical_force(const DiskSpec& disk, const MagnetStack& stack, const Pose& pose,
                             const EnergyQuadrature& q = {}) {
  detail::check_pose(pose);
  const double bottom = stack.top_z() + pose.gap;
  const double top = bottom + disk.thickness;
  auto face = [&](double z) {
    return detail::face_integral(disk, pose.offset, q, [&](double rho) {
      return diamagnetic_energy_density(disk, stack_field(stack, rho, z));
    });
  };
  return face(bottom) - face(top);
}

/// Lateral force F_x = -dU_mag/dd as the flux of the energy density through
/// the rim (the only surface with an x-normal).
inline double lateral_force(const DiskSpec& disk, const MagnetStack& stack, const Pose& pose,
                            const EnergyQuadrature& q = {}) {
  detail::check_pose(pose);
  const double bottom = stack.top_z() + pose.gap;
  const auto axial = map_rule(gauss_legendre(q.axial), bottom, bottom + disk.thickness);
  const auto az = map_rule(gauss_legendre(q.azimuthal), 0.0, constants::pi);
  double total = 0.0;
  for (const auto& [z, wz] : axial) {
    double ring = 0.0;
    for (const auto& [phi, wp] : az) {
      const double x = disk.radius * std::cos(phi) + pose.offset;
      const double y = disk.radius * std::sin(phi);
      const double u = diamagnetic_energy_density(disk, stack_field(stack, std::hypot(x, y), z));
      ring += wp * u * std::cos(phi);
    }
    total += wz * 2.0 * disk.radius * ring;
  }
  return -total;
}

struct LevitationSearch {
  double min_gap = 0.05e-3;
  double max_gap = 5.0e-3;
  std::size_t scan_points = 80;
  double tolerance = 1e-10;  // [m]
};

/// Lowest stable gap where the magnetic lift balances the weight.
inline double equilibrium_height(const DiskSpec& disk, const MagnetStack& stack,
                                 const EnergyQuadrature& q = {}, const LevitationSearch& s = {}) {
  disk.validate();
  const double weight = disk.mass * constants::g;
  auto net = [&](double h) { return vertical_force(disk, stack, {0.0, h}, q) - weight; };
  // Log-spaced scan: the lift varies fastest close to the magnets.
  const double ratio = std::log(s.max_gap / s.min_gap);
  double prev_h = s.min_gap;
  double prev_f = net(prev_h);
  for (std::size_t i = 1; i < s.scan_points; ++i) {
    const double h =
        s.min_gap * std::exp(ratio * static_cast<double>(i) / static_cast<double>(s.scan_points - 1));
    const double f = net(h);
    // Lift exceeding weight below, falling short above: restoring.
    if (prev_f > 0.0 && f <= 0.0) return bracketed_root(net, prev_h, h, s.tolerance);
    prev_h = h;
    prev_f = f;
  }
  throw SolverError("no stable levitation: lift never balances weight in [" +
                    std::to_string(s.min_gap) + ", " + std::to_string(s.max_gap) + "] m");
}

/// Curvatures of U_total at (d = 0, h) from centred second differences,
/// Richardson-extrapolated over two step sizes.
struct CurvatureSteps {
  double vertical = 20e-6;
  double lateral = 50e-6;
};

inline std::pair<double, double> energy_curvatures(const DiskSpec& disk, const MagnetStack& stack,
                                                   double h, const EnergyQuadrature& q = {},
                                                   const CurvatureSteps& steps = {}) {
  const double u0 = total_energy(disk, stack, {0.0, h}, q);
  auto vertical = [&](double s) {
    return (total_energy(disk, stack, {0.0, h + s}, q) - 2.0 * u0 +
            total_energy(disk, stack, {0.0, h - s}, q)) /
           (s * s);
  };
  auto lateral = [&](double s) {
    return (total_energy(disk, stack, {s, h}, q) - 2.0 * u0 + total_energy(disk, stack, {-s, h}, q)) /
           (s * s);
  };
  const double kv = richardson(vertical(steps.vertical), vertical(0.5 * steps.vertical), 2);
  const double kl = richardson(lateral(steps.lateral), lateral(0.5 * steps.lateral), 2);
  return {kv, kl};
}

/// Small-oscillation frequencies at gap h. Throws if either mode is unstable.
inline LevitationSolution trap_frequencies(const DiskSpec& disk, const MagnetStack& stack,
                                           double h, const EnergyQuadrature& q = {},
                                           const CurvatureSteps& steps = {}) {
  const auto [kv, kl] = energy_curvatures(disk, stack, h, q, steps);
  if (!(kv > 0.0)) throw SolverError("unstable mode: vertical curvature " + std::to_string(kv));
  if (!(kl > 0.0)) throw SolverError("unstable mode: lateral curvature " + std::to_string(kl));
  LevitationSolution sol;
  sol.h_V = h;
  sol.curvature_vertical = kv;
  sol.curvature_lateral = kl;
  sol.omega_V = std::sqrt(kv / disk.mass);
  sol.omega_L = std::sqrt(kl / disk.mass);
  return sol;
}

inline LevitationSolution levitate(const DiskSpec& disk, const MagnetStack& stack,
                                   const EnergyQuadrature& q = {}) {
  return trap_frequencies(disk, stack, equilibrium_height(disk, stack, q), q);
}

struct TiltDisplacement {
  double offset = 0.0;        // d [m]
  bool outside_small_angle = false;
};

/// Lateral COM shift of the disk on a platform tilted by delta_theta [rad]:
/// d = g * delta_theta / omega_L^2.
inline TiltDisplacement tilt_to_displacement(double delta_theta, double omega_L) {
  if (!(omega_L > 0.0)) throw DomainError("tilt_to_displacement: omega_L must be positive");
  return {constants::g * delta_theta / (omega_L * omega_L), std::abs(delta_theta) >= 0.1};
}

}  // namespace levrotor
