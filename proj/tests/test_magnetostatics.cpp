#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "levrotor/elliptic.hpp"
#include "levrotor/magnetostatics.hpp"
#include "levrotor/numerics.hpp"
#include "levrotor/presets.hpp"

using namespace levrotor;

namespace {

MagnetSpec d8h10() { return {MagnetShape::Cylinder, 4e-3, 0.0, 10e-3, -10e-3, 1.48, 1}; }

// On-axis field of a uniformly magnetized cylinder, written out by hand.
double on_axis_bz(double br, double radius, double base, double top, double z) {
  const double a = z - base;
  const double b = z - top;
  return 0.5 * br * (a / std::sqrt(a * a + radius * radius) - b / std::sqrt(b * b + radius * radius));
}

// Adaptive Simpson, used for the surface-charge oracle.
double simpson(const std::function<double(double)>& f, double a, double b, double eps, int depth) {
  const double c = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fc = f(c);
  std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fhi, double fmid, double whole, int d) {
        const double mid = 0.5 * (lo + hi);
        const double l = 0.5 * (lo + mid), r = 0.5 * (mid + hi);
        const double fl = f(l), fr = f(r);
        const double left = (mid - lo) / 6.0 * (flo + 4.0 * fl + fmid);
        const double right = (hi - mid) / 6.0 * (fmid + 4.0 * fr + fhi);
        if (d <= 0 || std::abs(left + right - whole) <= 15.0 * eps) {
          return left + right + (left + right - whole) / 15.0;
        }
        return rec(lo, mid, flo, fmid, fl, left, d - 1) + rec(mid, hi, fmid, fhi, fr, right, d - 1);
      };
  return rec(a, b, fa, fb, fc, (b - a) / 6.0 * (fa + 4.0 * fc + fb), depth);
}

// Field of one charged disk face (surface charge +-Br/mu0) by direct 2D
// quadrature over the face (rho', phi'). Returns (B_r, B_z) in tesla.
FieldVector face_field(double br, double radius, double zf, double r, double z) {
  const double dz = z - zf;
  auto integrand_phi = [&](double rho, bool radial) {
    return [=](double phi) {
      const double dx = r - rho * std::cos(phi);
      const double dy = -rho * std::sin(phi);
      const double d2 = dx * dx + dy * dy + dz * dz;
      const double inv3 = 1.0 / (d2 * std::sqrt(d2));
      return rho * (radial ? dx : dz) * inv3;
    };
  };
  auto outer = [&](bool radial) {
    return simpson(
        [&](double rho) {
          return 2.0 * simpson(integrand_phi(rho, radial), 0.0, constants::pi, 1e-12, 30);
        },
        0.0, radius, 1e-12, 30);
  };
  const double k = br / (4.0 * constants::pi);
  return {k * outer(true), k * outer(false)};
}

}  // namespace

TEST(Elliptic, MatchesSeriesForK) {
  // K(m) = pi/2 * sum [(2n)!/(2^{2n} n!^2)]^2 m^n
  for (double m : {0.0, 0.1, 0.3, 0.5}) {
    double term = 1.0;
    double sum = 1.0;
    for (int n = 1; n < 200; ++n) {
      const double c = (2.0 * n - 1.0) / (2.0 * n);
      term *= c * c * m;
      sum += term;
    }
    EXPECT_NEAR(ellint_K(m), 0.5 * constants::pi * sum, 1e-13 * sum);
  }
}

TEST(Elliptic, MatchesSeriesForE) {
  for (double m : {0.0, 0.1, 0.3, 0.5}) {
    double coef = 1.0;
    double sum = 1.0;
    for (int n = 1; n < 400; ++n) {
      const double c = (2.0 * n - 1.0) / (2.0 * n);
      coef *= c * c;
      sum -= coef * std::pow(m, n) / (2.0 * n - 1.0);
    }
    EXPECT_NEAR(ellint_E(m), 0.5 * constants::pi * sum, 1e-13);
  }
}

TEST(CylinderField, OnAxisMatchesClosedForm) {
  const auto m = d8h10();
  for (double z : {1e-3, 0.1e-3, 5e-3, -3e-3, -12e-3, 40e-3}) {
    const auto f = cylinder_field(m, 0.0, z);
    const double ref = on_axis_bz(1.48, 4e-3, -10e-3, 0.0, z);
    EXPECT_NEAR(f.B_z, ref, 1e-10 * std::abs(ref)) << "z=" << z;
    EXPECT_EQ(f.B_r, 0.0);
  }
}

TEST(CylinderField, FarFieldIsDipole) {
  const auto m = d8h10();
  const double volume = constants::pi * 16e-6 * 10e-3;
  const double moment = 1.48 * volume / constants::mu_0;
  const double zc = -5e-3;
  const double dist = 20.0 * 4e-3;
  for (double theta : {0.0, 0.4, 1.0, constants::pi / 2}) {
    const double r = dist * std::sin(theta);
    const double z = zc + dist * std::cos(theta);
    const auto f = cylinder_field(m, r, z);
    // Point dipole along z.
    const double pref = constants::mu_0 * moment / (4.0 * constants::pi * dist * dist * dist);
    const double bz = pref * (3.0 * std::cos(theta) * std::cos(theta) - 1.0);
    const double brr = pref * 3.0 * std::sin(theta) * std::cos(theta);
    const double mag = std::hypot(f.B_r, f.B_z);
    const double ref = std::hypot(brr, bz);
    EXPECT_NEAR(mag, ref, 0.02 * ref) << "theta=" << theta;
  }
}

TEST(CylinderField, FarFieldDecaysAsCube) {
  const auto m = d8h10();
  const double zc = -5e-3;
  for (double k : {20.0, 30.0}) {
    const double d1 = k * 4e-3;
    const auto f1 = cylinder_field(m, 0.3 * d1, zc + 0.9539 * d1);
    const auto f2 = cylinder_field(m, 0.6 * d1, zc + 1.9079 * d1);
    const double ratio = std::sqrt(f1.norm2() / f2.norm2());
    EXPECT_NEAR(ratio, 8.0, 0.02 * 8.0);
  }
}

TEST(CylinderField, RingIsOuterMinusInner) {
  const MagnetSpec ring{MagnetShape::Ring, 9.5e-3, 4.05e-3, 4e-3, -4e-3, 1.3, -1};
  const MagnetSpec outer{MagnetShape::Cylinder, 9.5e-3, 0.0, 4e-3, -4e-3, 1.3, -1};
  const MagnetSpec inner{MagnetShape::Cylinder, 4.05e-3, 0.0, 4e-3, -4e-3, 1.3, 1};
  for (double r : {0.0, 2e-3, 6e-3, 12e-3}) {
    const auto f = cylinder_field(ring, r, 1e-3);
    const auto g = cylinder_field(outer, r, 1e-3) + cylinder_field(inner, r, 1e-3);
    EXPECT_NEAR(f.B_r, g.B_r, 1e-15);
    EXPECT_NEAR(f.B_z, g.B_z, 1e-15);
  }
}

TEST(CylinderField, RejectsRimAndNegativeRadius) {
  const auto m = d8h10();
  EXPECT_THROW(cylinder_field(m, 4e-3, 0.0), GeometryError);
  EXPECT_THROW(cylinder_field(m, 4e-3 + 5e-10, -10e-3), GeometryError);
  EXPECT_THROW(cylinder_field(m, -1e-3, 0.0), DomainError);
  EXPECT_NO_THROW(cylinder_field(m, 4e-3 + 1e-6, 0.0));
}

TEST(CylinderField, MirrorSymmetryAboutCenterPlane) {
  auto m = d8h10();
  const double zc = -5e-3;
  for (double r : {1e-3, 3.9e-3, 6e-3}) {
    for (double dlt : {1e-3, 5.5e-3, 9e-3}) {
      const auto up = cylinder_field(m, r, zc + dlt);
      const auto dn = cylinder_field(m, r, zc - dlt);
      EXPECT_NEAR(up.B_r, -dn.B_r, 1e-12);
      EXPECT_NEAR(up.B_z, dn.B_z, 1e-12);
    }
  }
}

TEST(StackField, SingleMagnetIdentity) {
  const MagnetStack s({d8h10()});
  const auto a = stack_field(s, 2e-3, 1e-3);
  const auto b = cylinder_field(d8h10(), 2e-3, 1e-3);
  EXPECT_EQ(a.B_r, b.B_r);
  EXPECT_EQ(a.B_z, b.B_z);
}

TEST(StackField, OppositePairCancelsOnMidplane) {
  const MagnetSpec up{MagnetShape::Cylinder, 4e-3, 0.0, 5e-3, 2e-3, 1.3, 1};
  const MagnetSpec dn{MagnetShape::Cylinder, 4e-3, 0.0, 5e-3, -7e-3, 1.3, -1};
  const MagnetStack s({up, dn});
  for (double r : {0.0, 1e-3, 3e-3, 5e-3, 10e-3}) {
    EXPECT_NEAR(stack_field(s, r, 0.0).B_z, 0.0, 1e-14);
  }
}

TEST(StackField, SuperpositionOfConcatenatedStacks) {
  const auto ref = presets::reference_stack();
  const MagnetStack a({ref.magnets()[0], ref.magnets()[2]});
  const MagnetStack b({ref.magnets()[1], ref.magnets()[4]});
  const auto ab = a.concat(b);
  for (double r : {0.5e-3, 4.5e-3, 11e-3}) {
    const auto f = stack_field(ab, r, 1.2e-3);
    const auto g = stack_field(a, r, 1.2e-3) + stack_field(b, r, 1.2e-3);
    EXPECT_NEAR(f.B_r, g.B_r, 1e-14);
    EXPECT_NEAR(f.B_z, g.B_z, 1e-14);
  }
}

TEST(StackField, ReferenceStackMatchesSurfaceChargeQuadrature) {
  const auto stack = presets::reference_stack();
  const double r = 5e-3;
  const double z = stack.top_z() + 0.8e-3;
  FieldVector oracle;
  for (const auto& m : stack.magnets()) {
    const double br = m.polarity * m.remanence;
    // North face (top) carries +Br/mu0 charge for an up-magnet.
    auto add = [&](double radius, double s) {
      oracle += face_field(s * br, radius, m.top_z(), r, z);
      oracle += face_field(-s * br, radius, m.base_z, r, z);
    };
    add(m.outer_radius, 1.0);
    if (m.shape == MagnetShape::Ring) add(m.inner_radius, -1.0);
  }
  const auto f = stack_field(stack, r, z);
  EXPECT_NEAR(f.B_z, oracle.B_z, 1e-6 * std::abs(oracle.B_z));
  EXPECT_NEAR(f.B_r, oracle.B_r, 1e-6 * std::abs(oracle.B_r));
}

TEST(StackField, DivergenceVanishesAwayFromSurfaces) {
  const auto stack = presets::reference_stack();
  double bmax = 0.0;
  double divmax = 0.0;
  for (int i = 1; i <= 8; ++i) {
    for (int k = 0; k < 6; ++k) {
      const double r = 1.3e-3 * i;
      const double z = 0.3e-3 + 0.7e-3 * k;
      const double h0 = 1e-6 * stack.max_outer_radius();
      auto div = [&](double h) {
        // 5-point central differences.
        auto d5 = [&](const std::function<double(double)>& f, double x) {
          return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
        };
        const double drbr = d5([&](double rr) { return rr * stack_field(stack, rr, z).B_r; }, r) / r;
        const double dbz = d5([&](double zz) { return stack_field(stack, r, zz).B_z; }, z);
        return drbr + dbz;
      };
      const double d = richardson(div(h0), div(0.5 * h0), 4);
      divmax = std::max(divmax, std::abs(d));
      bmax = std::max(bmax, std::sqrt(stack_field(stack, r, z).norm2()));
    }
  }
  // Divergence carries units of T/m; scale by the outer radius.
  EXPECT_LE(divmax * stack.max_outer_radius(), 1e-6 * bmax);
}

TEST(MagnetStack, RejectsOverlapAndBadSpecs) {
  const MagnetSpec a{MagnetShape::Cylinder, 4e-3, 0.0, 10e-3, 0.0, 1.3, 1};
  MagnetSpec b = a;
  b.base_z = 5e-3;
  EXPECT_THROW(MagnetStack({a, b}), DomainError);
  EXPECT_THROW(MagnetStack(std::vector<MagnetSpec>{}), DomainError);
  MagnetSpec bad{MagnetShape::Ring, 4e-3, 5e-3, 1e-3, 0.0, 1.3, 1};
  EXPECT_THROW(MagnetStack({bad}), DomainError);
  // Nested ring around a cylinder is allowed.
  const MagnetSpec ring{MagnetShape::Ring, 9.5e-3, 4.05e-3, 10e-3, 0.0, 1.3, -1};
  EXPECT_NO_THROW(MagnetStack({a, ring}));
}

TEST(ResemblingField, ReferenceValues) {
  const ResemblingFieldParams p{constants::pi / 6.0, 0.1, -4.0};
  const auto f = resembling_field(p, 3.0, 0.0);
  EXPECT_NEAR(f.B_r, 0.1, 1e-15);
  // sin(pi/2)/3 + (pi/6) cos(pi/2) = 1/3
  EXPECT_NEAR(f.B_z, -0.1 * (-4.0) / 3.0, 1e-15);
  for (double z : {-1.0, 0.0, 2.5}) {
    const auto g = resembling_field(p, 0.0, z);
    EXPECT_EQ(g.B_r, 0.0);
    EXPECT_NEAR(g.B_z, -2.0 * p.alpha * p.beta * (z + p.z0), 1e-15);
  }
}

TEST(ResemblingField, ContinuousAtAxis) {
  const ResemblingFieldParams p{0.7, 1.3, 0.4};
  const auto a = resembling_field(p, 0.0, 1.0);
  const auto b = resembling_field(p, 1e-9, 1.0);
  EXPECT_NEAR(a.B_z, b.B_z, 1e-12);
}

TEST(ResemblingField, DivergenceFreeOnGrid) {
  const ResemblingFieldParams p{constants::pi / 6.0, 0.1, -4.0};
  double worst = 0.0;
  for (int i = 1; i <= 20; ++i) {
    for (int k = 0; k < 20; ++k) {
      const double r = 0.25 * i;
      const double z = -2.0 + 0.2 * k;
      auto div = [&](double h) {
        const double drbr = ((r + h) * resembling_field(p, r + h, z).B_r -
                             (r - h) * resembling_field(p, r - h, z).B_r) /
                            (2 * h * r);
        const double dbz =
            (resembling_field(p, r, z + h).B_z - resembling_field(p, r, z - h).B_z) / (2 * h);
        return drbr + dbz;
      };
      worst = std::max(worst, std::abs(richardson(div(1e-3), div(5e-4), 2)));
    }
  }
  EXPECT_LE(worst, 1e-12);
}
