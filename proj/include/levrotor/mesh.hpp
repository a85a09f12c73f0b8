#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "levrotor/constants.hpp"
#include "levrotor/error.hpp"

namespace levrotor {

enum class MeshSymmetry {
  Polar,      // rotation-invariant staggered rings
  Perturbed,  // irregular rings with randomly displaced interior nodes
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Triangulation of the disk midplane, counter-clockwise cells.
struct DiskMesh {
  std::vector<Point2> nodes;
  std::vector<std::array<int, 3>> cells;
  std::vector<double> areas;
  std::vector<bool> on_boundary;
  double radius = 0.0;
  double resolution = 0.0;
  MeshSymmetry symmetry = MeshSymmetry::Polar;
  /// Nodes per ring for polar meshes (rotation by 2*pi/N maps the mesh onto
  /// itself); 0 otherwise.
  int azimuthal_count = 0;
  double perturbation = 0.0;  // fraction of resolution
  std::uint64_t seed = 0;

  [[nodiscard]] std::size_t node_count() const noexcept { return nodes.size(); }
  [[nodiscard]] std::size_t cell_count() const noexcept { return cells.size(); }

  [[nodiscard]] double total_area() const {
    double a = 0.0;
    for (double v : areas) a += v;
    return a;
  }

  [[nodiscard]] Point2 centroid(std::size_t c) const {
    const auto& t = cells[c];
    return {(nodes[t[0]].x + nodes[t[1]].x + nodes[t[2]].x) / 3.0,
            (nodes[t[0]].y + nodes[t[1]].y + nodes[t[2]].y) / 3.0};
  }
};

namespace detail {

inline double signed_area(const Point2& a, const Point2& b, const Point2& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

inline void finalize_cells(DiskMesh& mesh) {
  mesh.areas.resize(mesh.cells.size());
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    auto& t = mesh.cells[c];
    double a = signed_area(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]);
    if (a < 0.0) {
      std::swap(t[1], t[2]);
      a = -a;
    }
    if (!(a > 0.0)) throw GeometryError("mesh: degenerate cell " + std::to_string(c));
    mesh.areas[c] = a;
  }
}

/// Constant node count per ring, odd rings rotated by half a step, so every
/// cell is an isosceles triangle symmetric about the ray through its apex.
inline DiskMesh polar_mesh(double radius, double resolution) {
  DiskMesh mesh;
  const int rings = static_cast<int>(std::ceil(radius / resolution - 1e-9));
  int per_ring = static_cast<int>(std::ceil(1.5 * 2.0 * constants::pi * radius / resolution));
  per_ring += (4 - per_ring % 4) % 4;
  mesh.azimuthal_count = per_ring;
  const double step = 2.0 * constants::pi / per_ring;

  mesh.nodes.push_back({0.0, 0.0});
  mesh.on_boundary.push_back(false);
  for (int k = 1; k <= rings; ++k) {
    const double r = radius * k / rings;
    for (int j = 0; j < per_ring; ++j) {
      const double th = (j + 0.5 * k) * step;
      mesh.nodes.push_back({r * std::cos(th), r * std::sin(th)});
      mesh.on_boundary.push_back(k == rings);
    }
  }
  auto id = [per_ring](int k, int j) { return 1 + (k - 1) * per_ring + ((j % per_ring) + per_ring) % per_ring; };
  for (int j = 0; j < per_ring; ++j) mesh.cells.push_back({0, id(1, j), id(1, j + 1)});
  for (int k = 1; k < rings; ++k) {
    for (int j = 0; j < per_ring; ++j) {
      mesh.cells.push_back({id(k, j), id(k + 1, j), id(k, j + 1)});
      mesh.cells.push_back({id(k + 1, j - 1), id(k + 1, j), id(k, j)});
    }
  }
  finalize_cells(mesh);
  return mesh;
}

/// Rings with node counts proportional to circumference and unrelated start
/// angles, stitched by an angular sweep. No rotational symmetry.
inline DiskMesh ring_mesh(double radius, double resolution) {
  DiskMesh mesh;
  const int rings = static_cast<int>(std::ceil(radius / resolution - 1e-9));
  std::vector<std::vector<int>> ring_ids(rings + 1);
  std::vector<std::vector<double>> ring_angles(rings + 1);
  mesh.nodes.push_back({0.0, 0.0});
  mesh.on_boundary.push_back(false);
  ring_ids[0] = {0};
  for (int k = 1; k <= rings; ++k) {
    const double r = radius * k / rings;
    int count = static_cast<int>(std::lround(1.5 * 2.0 * constants::pi * r / resolution));
    count = std::max(count, 6);
    // Irrational-ish offset so that no two rings share a start angle.
    const double offset = std::fmod(0.3710 * k + 0.1234 * k * k, 2.0 * constants::pi);
    for (int j = 0; j < count; ++j) {
      const double th = offset + 2.0 * constants::pi * j / count;
      ring_ids[k].push_back(static_cast<int>(mesh.nodes.size()));
      ring_angles[k].push_back(th);
      mesh.nodes.push_back({r * std::cos(th), r * std::sin(th)});
      mesh.on_boundary.push_back(k == rings);
    }
  }
  const auto& first = ring_ids[1];
  for (std::size_t j = 0; j < first.size(); ++j) {
    mesh.cells.push_back({0, first[j], first[(j + 1) % first.size()]});
  }
  for (int k = 1; k < rings; ++k) {
    const auto& a_ids = ring_ids[k];
    const auto& b_ids = ring_ids[k + 1];
    const std::size_t na = a_ids.size();
    const std::size_t nb = b_ids.size();
    const double a0 = ring_angles[k][0];
    auto rel = [a0](double th) {
      double v = std::fmod(th - a0, 2.0 * constants::pi);
      return v < 0.0 ? v + 2.0 * constants::pi : v;
    };
    // Outer ring re-indexed to start at the first node at or after a0.
    std::size_t b_start = 0;
    double best = 1e300;
    for (std::size_t j = 0; j < nb; ++j) {
      const double v = rel(ring_angles[k + 1][j]);
      if (v < best) {
        best = v;
        b_start = j;
      }
    }
    auto b_at = [&](std::size_t j) { return (b_start + j) % nb; };
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < na || j < nb) {
      const double ta = (i + 1 < na) ? rel(ring_angles[k][i + 1]) : 2.0 * constants::pi;
      const double tb = (j + 1 < nb) ? rel(ring_angles[k + 1][b_at(j + 1)])
                                     : 2.0 * constants::pi + rel(ring_angles[k + 1][b_at(0)]);
      const bool advance_a = (i < na) && (ta <= tb || j >= nb);
      if (advance_a) {
        mesh.cells.push_back({a_ids[i % na], b_ids[b_at(j % nb)], a_ids[(i + 1) % na]});
        ++i;
      } else {
        mesh.cells.push_back({a_ids[i % na], b_ids[b_at(j % nb)], b_ids[b_at((j + 1) % nb)]});
        ++j;
      }
    }
  }
  finalize_cells(mesh);
  return mesh;
}

/// Moves each interior node by a uniform random vector of length at most
/// amplitude*resolution, redrawing any move that would fold a cell or shrink
/// it below 10% of its original area.
inline void perturb_interior(DiskMesh& mesh, double amplitude, std::uint64_t seed) {
  std::vector<std::vector<int>> node_cells(mesh.nodes.size());
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    for (int v : mesh.cells[c]) node_cells[v].push_back(static_cast<int>(c));
  }
  const std::vector<double> original = mesh.areas;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double reach = amplitude * mesh.resolution;
  for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
    if (mesh.on_boundary[n]) continue;
    const Point2 old = mesh.nodes[n];
    for (int attempt = 0; attempt < 32; ++attempt) {
      const double rr = reach * std::sqrt(unit(rng));
      const double th = 2.0 * constants::pi * unit(rng);
      mesh.nodes[n] = {old.x + rr * std::cos(th), old.y + rr * std::sin(th)};
      bool ok = true;
      for (int c : node_cells[n]) {
        const auto& t = mesh.cells[c];
        const double a = signed_area(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]);
        if (a < 0.1 * original[c]) {
          ok = false;
          break;
        }
      }
      if (ok) break;
      mesh.nodes[n] = old;
    }
  }
  finalize_cells(mesh);
}

}  // namespace detail

struct MeshOptions {
  MeshSymmetry symmetry = MeshSymmetry::Polar;
  double perturbation = 0.3;  // fraction of resolution, perturbed meshes only
  std::uint64_t seed = 1;
};

/// Midplane mesh of a disk of the given radius. Resolution is the target
/// radial spacing; it must lie in (0, radius/4).
inline DiskMesh build_disk_mesh(double radius, double resolution, const MeshOptions& opts = {}) {
  if (!(radius > 0.0)) throw DomainError("build_disk_mesh: radius must be positive");
  if (!(resolution > 0.0)) throw DomainError("build_disk_mesh: resolution must be positive");
  if (!(resolution < 0.25 * radius)) {
    throw DomainError("build_disk_mesh: resolution too coarse (must be below radius/4)");
  }
  DiskMesh mesh;
  if (opts.symmetry == MeshSymmetry::Polar) {
    mesh = detail::polar_mesh(radius, resolution);
  } else {
    if (!(opts.perturbation >= 0.0 && opts.perturbation <= 0.45)) {
      throw DomainError("build_disk_mesh: perturbation must lie in [0, 0.45]");
    }
    mesh = detail::ring_mesh(radius, resolution);
    mesh.resolution = resolution;
    detail::perturb_interior(mesh, opts.perturbation, opts.seed);
    mesh.perturbation = opts.perturbation;
    mesh.seed = opts.seed;
  }
  mesh.radius = radius;
  mesh.resolution = resolution;
  mesh.symmetry = opts.symmetry;
  return mesh;
}

}  // namespace levrotor
