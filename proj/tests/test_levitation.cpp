#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>

#include "levrotor/levitation.hpp"
#include "levrotor/numerics.hpp"
#include "levrotor/presets.hpp"

using namespace levrotor;

namespace {

const DiskSpec kDisk = presets::reference_disk();
const MagnetStack kStack = presets::reference_stack();

// Independent lift: volume integral of -d(u)/dz with the z-derivative taken
// by central differences of the field, on a finer tensor grid.
double lift_by_volume_quadrature(const DiskSpec& disk, const MagnetStack& stack, double gap) {
  const auto radial = map_rule(gauss_legendre(48), 0.0, disk.radius);
  const double bottom = stack.top_z() + gap;
  const auto axial = map_rule(gauss_legendre(32), bottom, bottom + disk.thickness);
  const double h = 1e-7;
  double total = 0.0;
  for (const auto& [z, wz] : axial) {
    for (const auto& [r, wr] : radial) {
      const double up = diamagnetic_energy_density(disk, stack_field(stack, r, z + h));
      const double dn = diamagnetic_energy_density(disk, stack_field(stack, r, z - h));
      total += wz * wr * 2.0 * constants::pi * r * (up - dn) / (2.0 * h);
    }
  }
  return -total;
}

MagnetStack scaled(const MagnetStack& s, double factor) {
  std::vector<MagnetSpec> ms(s.magnets().begin(), s.magnets().end());
  for (auto& m : ms) m.remanence *= factor;
  return MagnetStack(std::move(ms));
}

}  // namespace

TEST(MagneticEnergy, ZeroSusceptibilityGivesZero) {
  DiskSpec d = kDisk;
  d.chi_parallel = 0.0;
  d.chi_perp = 0.0;
  EXPECT_EQ(magnetic_energy(d, kStack, {0.0, 0.8e-3}), 0.0);
  EXPECT_EQ(magnetic_energy(d, kStack, {0.3e-3, 0.8e-3}), 0.0);
}

TEST(MagneticEnergy, EvenInOffset) {
  for (double d : {0.05e-3, 0.4e-3, 1.5e-3}) {
    const double a = magnetic_energy(kDisk, kStack, {d, 0.85e-3});
    const double b = magnetic_energy(kDisk, kStack, {-d, 0.85e-3});
    EXPECT_NEAR(a, b, 1e-14 * a);
  }
}

TEST(MagneticEnergy, ConvergedAgainstFinerQuadrature) {
  const double u = magnetic_energy(kDisk, kStack, {0.0, 0.83e-3});
  const double fine = magnetic_energy(kDisk, kStack, {0.0, 0.83e-3}, {96, 64, 128});
  EXPECT_NEAR(u, fine, 1e-4 * fine);
  const double u3 = magnetic_energy(kDisk, kStack, {0.2e-3, 0.83e-3});
  const double fine3 = magnetic_energy(kDisk, kStack, {0.2e-3, 0.83e-3}, {96, 64, 128});
  EXPECT_NEAR(u3, fine3, 1e-4 * fine3);
}

TEST(MagneticEnergy, RejectsIntersectingPose) {
  EXPECT_THROW(magnetic_energy(kDisk, kStack, {0.0, 0.0}), GeometryError);
  EXPECT_THROW(magnetic_energy(kDisk, kStack, {0.0, -1e-4}), GeometryError);
}

TEST(MagneticEnergy, ForcesMatchEnergyDifferencesAtRandomPoses) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist_d(-1.0e-3, 1.0e-3);
  std::uniform_real_distribution<double> dist_h(0.4e-3, 2.0e-3);
  for (int i = 0; i < 10; ++i) {
    const double d = dist_d(rng);
    const double h = dist_h(rng);
    const double step = 1e-7;
    const double fz_fd = -(magnetic_energy(kDisk, kStack, {d, h + step}) -
                           magnetic_energy(kDisk, kStack, {d, h - step})) /
                         (2.0 * step);
    const double fx_fd = -(magnetic_energy(kDisk, kStack, {d + step, h}) -
                           magnetic_energy(kDisk, kStack, {d - step, h})) /
                         (2.0 * step);
    EXPECT_NEAR(vertical_force(kDisk, kStack, {d, h}), fz_fd, 1e-4 * std::abs(fz_fd));
    EXPECT_NEAR(lateral_force(kDisk, kStack, {d, h}), fx_fd, 1e-4 * std::abs(fx_fd));
  }
}

TEST(MagneticEnergy, NoLateralForceOnAxis) {
  const double fz = vertical_force(kDisk, kStack, {0.0, 0.85e-3});
  EXPECT_LE(std::abs(lateral_force(kDisk, kStack, {0.0, 0.85e-3})), 1e-9 * fz);
}

TEST(Equilibrium, ReferenceHeight) {
  const double h = equilibrium_height(kDisk, kStack);
  EXPECT_NEAR(h, 0.83e-3, 0.083e-3);
  EXPECT_NEAR(vertical_force(kDisk, kStack, {0.0, h}), kDisk.mass * constants::g,
              1e-6 * kDisk.mass * constants::g);
}

TEST(Equilibrium, HeavierDiskSitsLower) {
  DiskSpec heavy = kDisk;
  heavy.mass *= 2.0;
  EXPECT_LT(equilibrium_height(heavy, kStack), equilibrium_height(kDisk, kStack));
}

TEST(Equilibrium, HalvedSusceptibilityBalancesIndependentLift) {
  DiskSpec weak = kDisk;
  weak.chi_parallel *= 0.5;
  weak.chi_perp *= 0.5;
  const double h = equilibrium_height(weak, kStack);
  const double lift = lift_by_volume_quadrature(weak, kStack, h);
  EXPECT_NEAR(lift, weak.mass * constants::g, 1e-6 * weak.mass * constants::g);
}

TEST(Equilibrium, NoLevitationWindow) {
  DiskSpec brick = kDisk;
  brick.mass *= 1000.0;
  EXPECT_THROW(equilibrium_height(brick, kStack), SolverError);
}

TEST(TrapFrequencies, ReferenceValues) {
  const auto sol = levitate(kDisk, kStack);
  EXPECT_NEAR(sol.omega_V / (2.0 * constants::pi), 19.0, 1.9);
  EXPECT_NEAR(sol.omega_L / (2.0 * constants::pi), 5.8, 0.58);
  EXPECT_GT(sol.curvature_vertical, 0.0);
  EXPECT_GT(sol.curvature_lateral, 0.0);
}

TEST(TrapFrequencies, QuadraticInFieldScale) {
  const double h = 0.85e-3;
  const auto base = trap_frequencies(kDisk, kStack, h);
  const auto twice = trap_frequencies(kDisk, scaled(kStack, 1.5), h);
  EXPECT_NEAR(twice.curvature_vertical / base.curvature_vertical, 2.25, 1e-6);
  EXPECT_NEAR(twice.curvature_lateral / base.curvature_lateral, 2.25, 1e-6);
}

TEST(TrapFrequencies, AgreesWithParabolaThroughFiveSamples) {
  const double h = equilibrium_height(kDisk, kStack);
  const auto sol = trap_frequencies(kDisk, kStack, h);
  // Least-squares parabola through 5 equally spaced samples: curvature
  // 2*a from sum(x^2 y) normal equations on symmetric abscissae.
  auto parabola_curvature = [](const std::array<double, 5>& x, const std::array<double, 5>& y) {
    double s2 = 0, s4 = 0, sy = 0, sx2y = 0;
    for (int i = 0; i < 5; ++i) {
      s2 += x[i] * x[i];
      s4 += x[i] * x[i] * x[i] * x[i];
      sy += y[i];
      sx2y += x[i] * x[i] * y[i];
    }
    const double a = (5.0 * sx2y - s2 * sy) / (5.0 * s4 - s2 * s2);
    return 2.0 * a;
  };
  std::array<double, 5> xs{}, yv{}, yl{};
  for (int i = 0; i < 5; ++i) {
    xs[i] = (i - 2) * 10e-6;
    yv[i] = total_energy(kDisk, kStack, {0.0, h + xs[i]});
    yl[i] = total_energy(kDisk, kStack, {xs[i], h});
  }
  EXPECT_NEAR(parabola_curvature(xs, yv), sol.curvature_vertical, 0.005 * sol.curvature_vertical);
  EXPECT_NEAR(parabola_curvature(xs, yl), sol.curvature_lateral, 0.005 * sol.curvature_lateral);
}

TEST(TrapFrequencies, MatchesIntegratedOscillationPeriod) {
  const double h = equilibrium_height(kDisk, kStack);
  const auto sol = trap_frequencies(kDisk, kStack, h);
  const double weight = kDisk.mass * constants::g;
  // Small vertical and lateral oscillations under the quadrature forces.
  auto period = [&](bool vertical) {
    const double amp = 2e-6;
    using State = std::array<double, 2>;
    auto rhs = [&](double, const State& y) -> State {
      const double f = vertical ? vertical_force(kDisk, kStack, {0.0, h + y[0]}) - weight
                                : lateral_force(kDisk, kStack, {y[0], h});
      return {y[1], f / kDisk.mass};
    };
    const double omega_guess = vertical ? sol.omega_V : sol.omega_L;
    const double dt = 2.0 * constants::pi / omega_guess / 200.0;
    State y{amp, 0.0};
    double t = 0.0;
    std::vector<double> crossings;
    while (crossings.size() < 3) {
      const State next = rk4_step(rhs, t, y, dt);
      if (y[1] < 0.0 && next[1] >= 0.0) {
        // Linear interpolation of the velocity zero (turning point at x<0).
        crossings.push_back(t + dt * (-y[1]) / (next[1] - y[1]));
      }
      y = next;
      t += dt;
    }
    return (crossings[2] - crossings[0]) / 2.0;
  };
  EXPECT_NEAR(period(true), 2.0 * constants::pi / sol.omega_V, 0.01 * 2.0 * constants::pi / sol.omega_V);
  EXPECT_NEAR(period(false), 2.0 * constants::pi / sol.omega_L, 0.01 * 2.0 * constants::pi / sol.omega_L);
}

TEST(TrapFrequencies, SingleCylinderIsLaterallyUnstable) {
  const MagnetStack lone({MagnetSpec{MagnetShape::Cylinder, 4e-3, 0.0, 10e-3, -10e-3, 1.48, 1}});
  try {
    trap_frequencies(kDisk, lone, 1.0e-3);
    FAIL() << "expected an unstable-mode error";
  } catch (const SolverError& e) {
    EXPECT_NE(std::string(e.what()).find("lateral"), std::string::npos);
  }
}

TEST(TiltDisplacement, ReferenceValues) {
  EXPECT_EQ(tilt_to_displacement(0.0, 2.0 * constants::pi * 6.0).offset, 0.0);
  const double w = 2.0 * constants::pi * 6.0;
  const auto d = tilt_to_displacement(1.745e-3, w);
  EXPECT_NEAR(d.offset, 1.205e-5, 0.001e-5);
  EXPECT_FALSE(d.outside_small_angle);
  EXPECT_DOUBLE_EQ(tilt_to_displacement(2 * 1.745e-3, w).offset, 2.0 * d.offset);
  EXPECT_TRUE(tilt_to_displacement(0.2, w).outside_small_angle);
  EXPECT_THROW(tilt_to_displacement(0.01, 0.0), DomainError);
}
