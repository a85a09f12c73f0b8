#pragma once

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "levrotor/constants.hpp"
#include "levrotor/error.hpp"
#include "levrotor/levitation.hpp"
#include "levrotor/magnetostatics.hpp"
#include "levrotor/mesh.hpp"
#include "levrotor/numerics.hpp"

namespace levrotor {

struct SheetSolverSettings {
  double tolerance = 1e-10;          // relative residual, iterative path
  int max_iterations = 50000;
  std::size_t direct_limit = 200000;  // unknowns; direct factorization below
};

/// Thin-sheet eddy-current solution on a DiskMesh. Potentials are nodal,
/// currents and EMF are per cell.
struct EddySolution {
  std::vector<double> potential;   // V [V], zero mean
  std::vector<Point2> current;     // J_sheet [A/m]
  std::vector<Point2> emf;         // cell EMF [V/m]
  double conductance = 0.0;        // sigma_s = S_par * H [S]
  double solver_residual = 0.0;    // ||K V - b|| / ||b||
  int iterations = 0;              // 0 for the direct path
  bool direct = true;
};

struct DampingResult {
  double torque = 0.0;               // tau_z [N m]
  double damping_coefficient = 0.0;  // Gamma [N m s]
  double damping_rate = 0.0;         // gamma [Hz]
  double joule_power = 0.0;          // [W]
};

/// Line integral of the source EMF along the directed edge a -> b.
using EdgeEmf = std::function<double(int a, int b)>;

/// Solves div(sigma_s (E - grad V)) = 0 with zero normal current on the rim.
/// The EMF enters through its edge circulations, interpolated with Whitney
/// edge functions and averaged per cell; an EMF that is a discrete gradient
/// therefore drives no current at all.
inline EddySolution solve_sheet_potential(const DiskMesh& mesh, double conductance,
                                          const EdgeEmf& edge_emf,
                                          const SheetSolverSettings& settings = {}) {
  if (!(conductance > 0.0)) {
    throw SolverError("solve_sheet_potential: singular system (zero sheet conductance)");
  }
  const auto n = static_cast<Eigen::Index>(mesh.node_count());
  const std::size_t ncell = mesh.cell_count();
  EddySolution sol;
  sol.conductance = conductance;
  sol.emf.resize(ncell);
  std::vector<std::array<Point2, 3>> grads(ncell);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * ncell);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (std::size_t c = 0; c < ncell; ++c) {
    const auto& t = mesh.cells[c];
    const Point2& p0 = mesh.nodes[t[0]];
    const Point2& p1 = mesh.nodes[t[1]];
    const Point2& p2 = mesh.nodes[t[2]];
    const double area = mesh.areas[c];
    auto& g = grads[c];
    g[0] = {(p1.y - p2.y) / (2.0 * area), (p2.x - p1.x) / (2.0 * area)};
    g[1] = {(p2.y - p0.y) / (2.0 * area), (p0.x - p2.x) / (2.0 * area)};
    g[2] = {(p0.y - p1.y) / (2.0 * area), (p1.x - p0.x) / (2.0 * area)};
    Point2 e{0.0, 0.0};
    for (int k = 0; k < 3; ++k) {
      const int a = k;
      const int b = (k + 1) % 3;
      const double circ = edge_emf(t[a], t[b]);
      e.x += circ * (g[b].x - g[a].x) / 3.0;
      e.y += circ * (g[b].y - g[a].y) / 3.0;
    }
    sol.emf[c] = e;
    for (int a = 0; a < 3; ++a) {
      rhs[t[a]] += area * conductance * (e.x * g[a].x + e.y * g[a].y);
      for (int b = 0; b < 3; ++b) {
        trip.emplace_back(t[a], t[b], area * conductance * (g[a].x * g[b].x + g[a].y * g[b].y));
      }
    }
  }
  Eigen::SparseMatrix<double> stiffness(n, n);
  stiffness.setFromTriplets(trip.begin(), trip.end());

  // Pin node 0 to remove the constant null space; the gauge is fixed below.
  Eigen::SparseMatrix<double> pinned = stiffness;
  for (Eigen::SparseMatrix<double>::InnerIterator it(pinned, 0); it; ++it) {
    it.valueRef() = (it.row() == 0) ? 1.0 : 0.0;
  }
  for (Eigen::Index k = 0; k < pinned.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(pinned, k); it; ++it) {
      if (it.row() == 0 && it.col() != 0) it.valueRef() = 0.0;
    }
  }
  Eigen::VectorXd b = rhs;
  b[0] = 0.0;

  Eigen::VectorXd v;
  if (static_cast<std::size_t>(n) <= settings.direct_limit) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(pinned);
    if (ldlt.info() != Eigen::Success) throw SolverError("solve_sheet_potential: factorization failed");
    v = ldlt.solve(b);
    sol.direct = true;
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg(pinned);
    cg.setTolerance(settings.tolerance);
    cg.setMaxIterations(settings.max_iterations);
    v = cg.solve(b);
    sol.direct = false;
    sol.iterations = static_cast<int>(cg.iterations());
    if (cg.info() != Eigen::Success) {
      throw SolverError("solve_sheet_potential: CG did not converge, residual " +
                            std::to_string(cg.error()),
                        cg.error());
    }
  }

  // Zero-mean gauge with lumped nodal areas.
  std::vector<double> lumped(static_cast<std::size_t>(n), 0.0);
  for (std::size_t c = 0; c < ncell; ++c) {
    for (int a : mesh.cells[c]) lumped[a] += mesh.areas[c] / 3.0;
  }
  double mean = 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    mean += lumped[i] * v[i];
    total += lumped[i];
  }
  mean /= total;
  for (Eigen::Index i = 0; i < n; ++i) v[i] -= mean;

  const double rhs_norm = rhs.norm();
  sol.solver_residual = (rhs_norm > 0.0) ? (stiffness * v - rhs).norm() / rhs_norm : 0.0;
  sol.potential.assign(v.data(), v.data() + n);
  sol.current.resize(ncell);
  for (std::size_t c = 0; c < ncell; ++c) {
    const auto& t = mesh.cells[c];
    Point2 gv{0.0, 0.0};
    for (int a = 0; a < 3; ++a) {
      gv.x += v[t[a]] * grads[c][a].x;
      gv.y += v[t[a]] * grads[c][a].y;
    }
    sol.current[c] = {conductance * (sol.emf[c].x - gv.x), conductance * (sol.emf[c].y - gv.y)};
  }
  return sol;
}

/// Axial field at the lab position of every node, with the disk centre
/// displaced by `offset` along x and the midplane at height z_mid.
inline std::vector<double> sample_bz(const DiskMesh& mesh, const MagnetStack& stack, double offset,
                                     double z_mid) {
  std::vector<double> bz(mesh.node_count());
  for (std::size_t i = 0; i < bz.size(); ++i) {
    const double r = std::hypot(mesh.nodes[i].x + offset, mesh.nodes[i].y);
    bz[i] = stack_field(stack, r, z_mid).B_z;
  }
  return bz;
}

/// Motional EMF (v x B) restricted to the sheet, v = omega z x rho about the
/// disk centre: (omega x B_z, omega y B_z). Edge integrals use the midpoint
/// rule with the mean of the nodal B_z samples.
inline EdgeEmf motional_edge_emf(const DiskMesh& mesh, const std::vector<double>& bz,
                                 double omega) {
  return [&mesh, &bz, omega](int a, int b) {
    const Point2& pa = mesh.nodes[a];
    const Point2& pb = mesh.nodes[b];
    const double mx = 0.5 * (pa.x + pb.x);
    const double my = 0.5 * (pa.y + pb.y);
    const double bmid = 0.5 * (bz[a] + bz[b]);
    return omega * bmid * (mx * (pb.x - pa.x) + my * (pb.y - pa.y));
  };
}

/// Thin-sheet solve for a disk spinning at omega in the sampled field.
inline EddySolution solve_potential(const DiskMesh& mesh, const std::vector<double>& bz,
                                    double omega, const DiskSpec& disk,
                                    const SheetSolverSettings& settings = {}) {
  if (bz.size() != mesh.node_count()) throw DomainError("solve_potential: field sample count mismatch");
  return solve_sheet_potential(mesh, disk.sigma_parallel * disk.thickness,
                               motional_edge_emf(mesh, bz, omega), settings);
}

/// Lorentz torque about the disk centre, tau_z = sum (x f_y - y f_x) A with
/// f = J x B_z z-hat, and the derived damping Gamma = |tau|/omega,
/// gamma = Gamma / I.
inline DampingResult torque_and_damping(const DiskMesh& mesh, const EddySolution& sol,
                                        const std::vector<double>& bz, double omega,
                                        const DiskSpec& disk) {
  if (omega == 0.0) throw DomainError("torque_and_damping: omega = 0 leaves Gamma undefined");
  DampingResult out;
  double tau = 0.0;
  double joule = 0.0;
  for (std::size_t c = 0; c < mesh.cell_count(); ++c) {
    const auto& t = mesh.cells[c];
    const Point2 xc = mesh.centroid(c);
    const double bc = (bz[t[0]] + bz[t[1]] + bz[t[2]]) / 3.0;
    const Point2& j = sol.current[c];
    const double fx = j.y * bc;
    const double fy = -j.x * bc;
    tau += (xc.x * fy - xc.y * fx) * mesh.areas[c];
    joule += (j.x * j.x + j.y * j.y) / sol.conductance * mesh.areas[c];
  }
  out.torque = tau;
  out.joule_power = joule;
  out.damping_coefficient = std::abs(tau) / std::abs(omega);
  out.damping_rate = out.damping_coefficient / disk.moment_of_inertia();
  return out;
}

/// Height of the disk midplane above the origin for a given gap.
inline double midplane_height(const MagnetStack& stack, const DiskSpec& disk, double gap) {
  return stack.top_z() + gap + 0.5 * disk.thickness;
}

/// Damping rate at one offset on a prebuilt mesh.
inline DampingResult eddy_damping(const DiskMesh& mesh, const DiskSpec& disk,
                                  const MagnetStack& stack, double gap, double offset,
                                  double omega, const SheetSolverSettings& settings = {}) {
  const auto bz = sample_bz(mesh, stack, offset, midplane_height(stack, disk, gap));
  const auto sol = solve_potential(mesh, bz, omega, disk, settings);
  return torque_and_damping(mesh, sol, bz, omega, disk);
}

/// gamma(d) = c1 d^c2 from log-log least squares.
struct PowerLawFit {
  double c1 = 0.0;
  double c2 = 0.0;
  double r_squared = 0.0;
  double window_min = 0.0;  // [m]
  double window_max = 0.0;  // [m]
  std::size_t points = 0;

  [[nodiscard]] double operator()(double d) const { return c1 * std::pow(d, c2); }
};

inline PowerLawFit fit_power_law(std::span<const double> offsets, std::span<const double> gammas,
                                 double window_min = 0.05e-3,
                                 double window_max = std::numeric_limits<double>::infinity()) {
  if (offsets.size() != gammas.size()) throw DomainError("fit_power_law: size mismatch");
  std::vector<double> lx;
  std::vector<double> ly;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    const double d = std::abs(offsets[i]);
    if (d < window_min || d > window_max || !(gammas[i] > 0.0)) continue;
    lx.push_back(std::log(d));
    ly.push_back(std::log(gammas[i]));
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  if (lx.size() < 3) {
    throw DomainError("fit_power_law: fewer than 3 points inside the fit window");
  }
  const LinearFit lf = fit_line(lx, ly);
  return {std::exp(lf.intercept), lf.slope, lf.r_squared, lo, hi, lx.size()};
}

struct OffsetSample {
  double offset = 0.0;
  double damping_rate = 0.0;
  double torque = 0.0;
  double joule_power = 0.0;
};

struct OffsetSweep {
  std::vector<OffsetSample> samples;
  PowerLawFit fit;
};

/// gamma over a list of offsets on one polar mesh, plus the power-law fit
/// restricted to d >= fit_window_min.
inline OffsetSweep sweep_offset(const DiskSpec& disk, const MagnetStack& stack, double gap,
                                const std::vector<double>& offsets, double omega,
                                double resolution, double fit_window_min = 0.05e-3,
                                unsigned threads = 0, const SheetSolverSettings& settings = {}) {
  for (double d : offsets) {
    if (!(d > 0.0 && d <= disk.radius)) throw DomainError("sweep_offset: offsets must lie in (0, R]");
  }
  const DiskMesh mesh = build_disk_mesh(disk.radius, resolution);
  OffsetSweep sweep;
  sweep.samples = parallel_map(
      offsets,
      [&](double d) {
        const auto r = eddy_damping(mesh, disk, stack, gap, d, omega, settings);
        return OffsetSample{d, r.damping_rate, r.torque, r.joule_power};
      },
      threads);
  std::vector<double> ds;
  std::vector<double> gs;
  for (const auto& s : sweep.samples) {
    ds.push_back(s.offset);
    gs.push_back(s.damping_rate);
  }
  sweep.fit = fit_power_law(ds, gs, fit_window_min);
  return sweep;
}

/// Outcome of the analytic zero-current check on the resembling field.
struct ZeroCurrentReport {
  double max_current_over_sigma = 0.0;  // max |-grad V + v x B|
  double normalized_current = 0.0;      // divided by omega*beta*R
  double max_curl = 0.0;                // max |curl(v x B)|, Richardson FD
  double normalized_curl = 0.0;         // divided by omega*beta
  std::size_t grid_points = 0;
};

struct ZeroCurrentGeometry {
  double radius = 5.01;   // same length unit as the field parameters
  double z_bottom = 0.83;
  double thickness = 1.12;
};

namespace detail {

/// v x B for rigid rotation about the axis: (omega r B_z) r-hat - (omega r B_r) z-hat.
inline std::array<double, 2> motional_rz(const ResemblingFieldParams& p, double omega, double r,
                                         double z) {
  const FieldVector b = resembling_field(p, r, z);
  return {omega * r * b.B_z, -omega * r * b.B_r};
}

}  // namespace detail

/// Evaluates J/sigma = -grad V + v x B for the potential
/// V = -omega beta r (z + z0) sin(alpha r) on an (r, z) grid over the disk
/// cross-section, and the azimuthal curl of v x B by Richardson-extrapolated
/// central differences.
inline ZeroCurrentReport verify_zero_current(const ResemblingFieldParams& p, double omega,
                                             const ZeroCurrentGeometry& geo = {},
                                             std::size_t grid = 50) {
  p.validate();
  if (grid < 2) throw DomainError("verify_zero_current: grid must have at least 2 points per axis");
  ZeroCurrentReport rep;
  const double a = p.alpha;
  const double beta = p.beta;
  for (std::size_t i = 0; i < grid; ++i) {
    const double r = geo.radius * static_cast<double>(i) / static_cast<double>(grid - 1);
    for (std::size_t k = 0; k < grid; ++k) {
      const double z =
          geo.z_bottom + geo.thickness * static_cast<double>(k) / static_cast<double>(grid - 1);
      const double zz = z + p.z0;
      // grad V in closed form.
      const double dv_dr = -omega * beta * zz * (std::sin(a * r) + a * r * std::cos(a * r));
      const double dv_dz = -omega * beta * r * std::sin(a * r);
      const auto vb = detail::motional_rz(p, omega, r, z);
      const double jr = -dv_dr + vb[0];
      const double jz = -dv_dz + vb[1];
      rep.max_current_over_sigma = std::max(rep.max_current_over_sigma, std::hypot(jr, jz));

      // curl_phi(F) = dF_r/dz - dF_z/dr; skip r closer than the stencil to the axis.
      if (r > 0.0) {
        auto curl = [&](double s) {
          const double hs = s * geo.radius;
          const double r_lo = std::max(r - hs, 0.0);
          const double r_hi = r + hs;
          const double dfr_dz = (detail::motional_rz(p, omega, r, z + hs)[0] -
                                 detail::motional_rz(p, omega, r, z - hs)[0]) /
                                (2.0 * hs);
          const double dfz_dr = (detail::motional_rz(p, omega, r_hi, z)[1] -
                                 detail::motional_rz(p, omega, r_lo, z)[1]) /
                                (r_hi - r_lo);
          return dfr_dz - dfz_dr;
        };
        const double h0 = std::min(1e-3, 0.5 * r / geo.radius);
        const double c = richardson(curl(h0), curl(0.5 * h0), 2);
        rep.max_curl = std::max(rep.max_curl, std::abs(c));
      }
      ++rep.grid_points;
    }
  }
  const double scale = std::abs(omega * beta);
  rep.normalized_current = (scale > 0.0) ? rep.max_current_over_sigma / (scale * geo.radius) : 0.0;
  rep.normalized_curl = (scale > 0.0) ? rep.max_curl / scale : 0.0;
  return rep;
}

struct ConvergenceRow {
  double resolution = 0.0;
  std::size_t nodes = 0;
  std::size_t cells = 0;
  double spurious_gamma = 0.0;  // perturbed mesh, d = 0
  double polar_gamma = 0.0;     // symmetric mesh, d = 0
};

/// Damping rate at d = 0 over a list of resolutions. The exact answer is
/// zero; anything left is produced by the mesh.
inline std::vector<ConvergenceRow> mesh_convergence_study(
    const DiskSpec& disk, const MagnetStack& stack, double gap, const std::vector<double>& resolutions,
    double omega, double perturbation = 0.3, std::uint64_t seed = 1, unsigned threads = 0,
    const SheetSolverSettings& settings = {}) {
  return parallel_map(
      resolutions,
      [&](double res) {
        ConvergenceRow row;
        row.resolution = res;
        const DiskMesh perturbed =
            build_disk_mesh(disk.radius, res, {MeshSymmetry::Perturbed, perturbation, seed});
        row.nodes = perturbed.node_count();
        row.cells = perturbed.cell_count();
        row.spurious_gamma =
            eddy_damping(perturbed, disk, stack, gap, 0.0, omega, settings).damping_rate;
        const DiskMesh polar = build_disk_mesh(disk.radius, res);
        row.polar_gamma = eddy_damping(polar, disk, stack, gap, 0.0, omega, settings).damping_rate;
        return row;
      },
      threads);
}

/// Classical skin depth sqrt(2 / (omega mu sigma)).
inline double skin_depth(double sigma, double mu, double omega_ac) {
  if (!(sigma > 0.0) || !(mu > 0.0) || !(omega_ac > 0.0)) {
    throw DomainError("skin_depth: arguments must be positive");
  }
  return std::sqrt(2.0 / (omega_ac * mu * sigma));
}

}  // namespace levrotor
