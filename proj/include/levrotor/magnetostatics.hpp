#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "levrotor/constants.hpp"
#include "levrotor/elliptic.hpp"
#include "levrotor/error.hpp"

namespace levrotor {

enum class MagnetShape { Cylinder, Ring };

/// Uniformly, axially magnetized cylinder or ring coaxial with the z-axis.
/// Lengths in metres, remanence in tesla, polarity +1 (up) or -1 (down).
struct MagnetSpec {
  MagnetShape shape = MagnetShape::Cylinder;
  double outer_radius = 0.0;
  double inner_radius = 0.0;
  double height = 0.0;
  double base_z = 0.0;
  double remanence = 0.0;
  int polarity = 1;

  [[nodiscard]] double top_z() const noexcept { return base_z + height; }

  void validate() const {
    if (!(outer_radius > 0.0)) throw DomainError("magnet: outer_radius must be positive");
    if (shape == MagnetShape::Cylinder && inner_radius != 0.0) {
      throw DomainError("magnet: cylinder must have inner_radius = 0");
    }
    if (shape == MagnetShape::Ring && !(inner_radius > 0.0)) {
      throw DomainError("magnet: ring needs a positive inner_radius");
    }
    if (!(inner_radius < outer_radius)) {
      throw DomainError("magnet: inner_radius must be smaller than outer_radius");
    }
    if (!(height > 0.0)) throw DomainError("magnet: height must be positive");
    if (!(remanence > 0.0)) throw DomainError("magnet: remanence must be positive");
    if (polarity != 1 && polarity != -1) throw DomainError("magnet: polarity must be +1 or -1");
    if (!std::isfinite(base_z)) throw DomainError("magnet: base_z must be finite");
  }
};

/// Axisymmetric field sample. B_phi vanishes for coaxial stacks.
struct FieldVector {
  double B_r = 0.0;
  double B_z = 0.0;

  FieldVector& operator+=(const FieldVector& o) noexcept {
    B_r += o.B_r;
    B_z += o.B_z;
    return *this;
  }
  friend FieldVector operator+(FieldVector a, const FieldVector& b) noexcept { return a += b; }
  friend FieldVector operator*(double s, FieldVector a) noexcept {
    a.B_r *= s;
    a.B_z *= s;
    return a;
  }
  [[nodiscard]] double norm2() const noexcept { return B_r * B_r + B_z * B_z; }
};

/// Coaxial magnets with pairwise disjoint volumes. Nested arrangements
/// (cylinders inside rings) share an axial extent but not a radial one.
class MagnetStack {
 public:
  MagnetStack() = default;

  explicit MagnetStack(std::vector<MagnetSpec> magnets) : magnets_(std::move(magnets)) {
    if (magnets_.empty()) throw DomainError("magnet stack must not be empty");
    for (const auto& m : magnets_) m.validate();
    for (std::size_t i = 0; i < magnets_.size(); ++i) {
      for (std::size_t j = i + 1; j < magnets_.size(); ++j) {
        if (overlap(magnets_[i], magnets_[j])) {
          throw DomainError("magnet stack: magnets " + std::to_string(i) + " and " +
                            std::to_string(j) + " overlap");
        }
      }
    }
  }

  [[nodiscard]] std::span<const MagnetSpec> magnets() const noexcept { return magnets_; }
  [[nodiscard]] std::size_t size() const noexcept { return magnets_.size(); }

  [[nodiscard]] double top_z() const {
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& m : magnets_) top = std::max(top, m.top_z());
    return top;
  }

  [[nodiscard]] double max_outer_radius() const {
    double r = 0.0;
    for (const auto& m : magnets_) r = std::max(r, m.outer_radius);
    return r;
  }

  /// True when the point lies strictly inside some magnet's volume.
  [[nodiscard]] bool contains(double r, double z) const {
    return std::any_of(magnets_.begin(), magnets_.end(), [&](const MagnetSpec& m) {
      return z > m.base_z && z < m.top_z() && r > m.inner_radius && r < m.outer_radius;
    });
  }

  [[nodiscard]] MagnetStack concat(const MagnetStack& other) const {
    std::vector<MagnetSpec> all = magnets_;
    all.insert(all.end(), other.magnets_.begin(), other.magnets_.end());
    return MagnetStack(std::move(all));
  }

 private:
  static bool overlap(const MagnetSpec& a, const MagnetSpec& b) {
    const bool axial = a.base_z < b.top_z() && b.base_z < a.top_z();
    const bool radial = a.inner_radius < b.outer_radius && b.inner_radius < a.outer_radius;
    return axial && radial;
  }

  std::vector<MagnetSpec> magnets_;
};

namespace detail {

/// Minimum distance from a rim circle at which the field is evaluated [m].
inline constexpr double kEdgeExclusion = 1e-9;

/// Field of a uniformly magnetized solid cylinder (radius a, bottom z0,
/// height len) with signed remanence br, from its equivalent surface charges
/// on the end faces, reduced to complete elliptic integrals (Derby-Olbert
/// form).
inline FieldVector uniform_cylinder(double a, double z0, double len, double br, double r,
                                    double z) {
  const double zc = z - (z0 + 0.5 * len);
  const double b = 0.5 * len;
  for (double face : {z0, z0 + len}) {
    if (std::hypot(r - a, z - face) < kEdgeExclusion) {
      throw GeometryError("field evaluated on a magnet rim circle (r = " + std::to_string(r) +
                          ", z = " + std::to_string(z) + ")");
    }
  }
  const double b0 = br / constants::pi;
  const double gam = (a - r) / (a + r);
  double br_sum = 0.0;
  double bz_sum = 0.0;
  for (int side = 0; side < 2; ++side) {
    const double zs = (side == 0) ? zc + b : zc - b;
    const double sign = (side == 0) ? 1.0 : -1.0;
    const double den = std::sqrt(zs * zs + (r + a) * (r + a));
    const double kc = std::sqrt((zs * zs + (a - r) * (a - r))) / den;
    br_sum += sign * (a / den) * cel(kc, 1.0, 1.0, -1.0);
    bz_sum += sign * (zs / den) * cel(kc, gam * gam, 1.0, gam);
  }
  return {b0 * br_sum, b0 * a / (a + r) * bz_sum};
}

}  // namespace detail

/// Field of a single magnet at (r, z). A ring is the outer solid cylinder
/// plus an oppositely magnetized inner one.
inline FieldVector cylinder_field(const MagnetSpec& spec, double r, double z) {
  if (!(r >= 0.0)) throw DomainError("cylinder_field: r must be non-negative");
  if (!std::isfinite(z)) throw DomainError("cylinder_field: z must be finite");
  const double br = spec.polarity * spec.remanence;
  FieldVector f = detail::uniform_cylinder(spec.outer_radius, spec.base_z, spec.height, br, r, z);
  if (spec.shape == MagnetShape::Ring) {
    f += detail::uniform_cylinder(spec.inner_radius, spec.base_z, spec.height, -br, r, z);
  }
  if (r == 0.0) f.B_r = 0.0;
  return f;
}

/// Linear superposition over the stack members.
inline FieldVector stack_field(const MagnetStack& stack, double r, double z) {
  FieldVector total;
  for (const auto& m : stack.magnets()) total += cylinder_field(m, r, z);
  return total;
}

/// Parameters of the analytic axisymmetric test field
/// B_r = beta sin(alpha r), B_z = -beta (z + z0) (sin(alpha r)/r + alpha cos(alpha r)).
/// Units are whatever the caller uses consistently (the reference example
/// is in millimetre-like units).
struct ResemblingFieldParams {
  double alpha = constants::pi / 6.0;
  double beta = 0.1;
  double z0 = -4.0;

  void validate() const {
    if (alpha == 0.0 || !std::isfinite(alpha)) throw DomainError("resembling field: alpha must be nonzero");
    if (!std::isfinite(beta) || !std::isfinite(z0)) throw DomainError("resembling field: non-finite parameter");
  }
};

/// Divergence-free by construction: (1/r) d(r B_r)/dr = -dB_z/dz.
inline FieldVector resembling_field(const ResemblingFieldParams& p, double r, double z) {
  if (!(r >= 0.0)) throw DomainError("resembling_field: r must be non-negative");
  if (!std::isfinite(z)) throw DomainError("resembling_field: z must be finite");
  const double ar = p.alpha * r;
  if (r == 0.0) return {0.0, -2.0 * p.alpha * p.beta * (z + p.z0)};
  // sin(ar)/r loses digits for tiny r; the series keeps it exact.
  const double sinc_term = (std::abs(ar) < 1e-4) ? p.alpha * (1.0 - ar * ar / 6.0) : std::sin(ar) / r;
  return {p.beta * std::sin(ar), -p.beta * (z + p.z0) * (sinc_term + p.alpha * std::cos(ar))};
}

}  // namespace levrotor
