#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "levrotor/constants.hpp"
#include "levrotor/error.hpp"
#include "levrotor/levitation.hpp"
#include "levrotor/numerics.hpp"

namespace levrotor {

enum class FlowRegime { Continuum, Transition, FreeMolecular };

inline std::string_view to_string(FlowRegime r) {
  switch (r) {
    case FlowRegime::Continuum:
      return "continuum";
    case FlowRegime::Transition:
      return "transition";
    case FlowRegime::FreeMolecular:
      return "free-molecular";
  }
  return "unknown";
}

inline constexpr double kContinuumKnudsen = 0.01;
inline constexpr double kFreeMolecularKnudsen = 10.0;

/// Gas state. Defaults describe air at 300 K.
struct GasSpec {
  double pressure = 1.0;                            // P [Pa]
  double temperature = 300.0;                       // T [K]
  double molecule_mass = 28.97 * constants::amu;    // m0 [kg]
  double molecule_diameter = 3.7e-10;               // d_m [m]
  double viscosity = 1.81e-5;                       // mu_visc [Pa s]
  double accommodation = 1.0;                       // acc, (0, 1]

  [[nodiscard]] double density() const noexcept {
    return pressure * molecule_mass / (constants::k_B * temperature);
  }

  void validate() const {
    if (!(pressure > 0.0)) throw DomainError("gas: pressure must be positive");
    if (!(temperature > 0.0)) throw DomainError("gas: temperature must be positive");
    if (!(molecule_mass > 0.0)) throw DomainError("gas: molecule mass must be positive");
    if (!(molecule_diameter > 0.0)) throw DomainError("gas: molecule diameter must be positive");
    if (!(viscosity > 0.0)) throw DomainError("gas: viscosity must be positive");
    if (!(accommodation > 0.0 && accommodation <= 1.0)) {
      throw DomainError("gas: accommodation factor must lie in (0, 1]");
    }
  }
};

struct RegimeReport {
  double mean_free_path = 0.0;  // lambda [m]
  double knudsen = 0.0;         // lambda / H
  FlowRegime regime = FlowRegime::Continuum;
};

inline FlowRegime classify_knudsen(double kn) {
  if (kn < kContinuumKnudsen) return FlowRegime::Continuum;
  if (kn > kFreeMolecularKnudsen) return FlowRegime::FreeMolecular;
  return FlowRegime::Transition;
}

/// Hard-sphere mean free path k_B T / (sqrt(2) pi d_m^2 P) and Kn = lambda / H.
inline RegimeReport knudsen_regime(const GasSpec& gas, double length) {
  gas.validate();
  if (!(length > 0.0)) throw DomainError("knudsen_regime: length must be positive");
  RegimeReport rep;
  rep.mean_free_path = constants::k_B * gas.temperature /
                       (std::sqrt(2.0) * constants::pi * gas.molecule_diameter *
                        gas.molecule_diameter * gas.pressure);
  rep.knudsen = rep.mean_free_path / length;
  rep.regime = classify_knudsen(rep.knudsen);
  return rep;
}

struct FreeMolecularDamping {
  double damping_coefficient = 0.0;  // Gamma_fm [N m s]
  double damping_rate = 0.0;         // gamma_fm [Hz]
  bool outside_regime = false;       // set when the gas is in the continuum regime
};

/// Gamma_fm = acc R^4 sqrt(pi m0 / (2 k_B T)) (1 + 2H/R) P, gamma_fm = Gamma_fm / I.
inline FreeMolecularDamping gamma_free_molecular(const GasSpec& gas, const DiskSpec& disk) {
  gas.validate();
  disk.validate();
  FreeMolecularDamping out;
  const double r4 = std::pow(disk.radius, 4);
  out.damping_coefficient =
      gas.accommodation * r4 *
      std::sqrt(constants::pi * gas.molecule_mass / (2.0 * constants::k_B * gas.temperature)) *
      (1.0 + 2.0 * disk.thickness / disk.radius) * gas.pressure;
  out.damping_rate = out.damping_coefficient / disk.moment_of_inertia();
  out.outside_regime = knudsen_regime(gas, disk.thickness).regime == FlowRegime::Continuum;
  return out;
}

/// Pressure at which the free-molecular rate equals a given rate.
inline double free_molecular_crossover(double gamma, const GasSpec& gas, const DiskSpec& disk) {
  if (!(gamma > 0.0)) throw DomainError("free_molecular_crossover: rate must be positive");
  GasSpec unit = gas;
  unit.pressure = 1.0;
  return gamma / gamma_free_molecular(unit, disk).damping_rate;
}

/// Stretched tensor grid for the swirl solve. Spacing grows linearly with
/// the distance to the nearest geometric feature (the no-slip wall and the
/// disk edges), starting from gap / gap_cells, capped at max_spacing.
struct SwirlGridSettings {
  double gap_cells = 32.0;       // cells across the gap at refinement 1
  double growth = 0.05;          // d(spacing)/d(distance)
  double max_spacing = 0.5e-3;   // [m]
  double domain_factor = 5.0;    // outer radius and headroom in disk radii
  double refinement = 1.0;       // divides every spacing
  double residual_limit = 1e-9;  // relative, after the direct solve
};

struct SwirlSolution {
  std::vector<double> r;            // [m], size nr
  std::vector<double> z;            // [m], size nz
  std::vector<double> u_phi;        // [m/s], index k * nr + i
  std::vector<bool> solid;          // true inside or on the disk
  double omega = 0.0;               // [rad/s]
  double torque = 0.0;              // [N m], opposes omega
  double torque_bottom = 0.0;       // share through the face above the gap
  double torque_top = 0.0;
  double torque_rim = 0.0;
  double damping_coefficient = 0.0; // Gamma_c [N m s]
  double damping_rate = 0.0;        // gamma_c [Hz]
  double dissipation = 0.0;         // viscous power from the velocity field [W]
  double solver_residual = 0.0;
  double coarse_torque = 0.0;       // same problem at half the refinement
  double grid_change = 0.0;         // |torque - coarse_torque| / |torque|

  [[nodiscard]] std::size_t nr() const noexcept { return r.size(); }
  [[nodiscard]] std::size_t nz() const noexcept { return z.size(); }
  [[nodiscard]] double at(std::size_t i, std::size_t k) const { return u_phi[k * r.size() + i]; }
};

namespace detail {

/// Nodes on [a, b] whose local spacing follows s(x) = min(cap, s0 + g * dist(x,
/// features)). The cell count is the integral of 1/s rounded up; nodes are
/// placed by inverting the cumulative integral, so every feature inside
/// (a, b) must be supplied as a segment end by the caller.
inline std::vector<double> graded_segment(double a, double b, double s0, double g, double cap,
                                          bool fine_at_a, bool fine_at_b) {
  auto spacing = [&](double x) {
    double d = std::numeric_limits<double>::infinity();
    if (fine_at_a) d = std::min(d, x - a);
    if (fine_at_b) d = std::min(d, b - x);
    return std::isinf(d) ? cap : std::min(cap, s0 + g * d);
  };
  const std::size_t samples = 4096;
  std::vector<double> cum(samples + 1, 0.0);
  const double dx = (b - a) / static_cast<double>(samples);
  for (std::size_t j = 0; j < samples; ++j) {
    const double xm = a + (static_cast<double>(j) + 0.5) * dx;
    cum[j + 1] = cum[j] + dx / spacing(xm);
  }
  const auto cells = static_cast<std::size_t>(std::max(1.0, std::ceil(cum.back() - 1e-9)));
  std::vector<double> nodes(cells + 1);
  nodes.front() = a;
  nodes.back() = b;
  std::size_t j = 0;
  for (std::size_t n = 1; n < cells; ++n) {
    const double target = cum.back() * static_cast<double>(n) / static_cast<double>(cells);
    while (cum[j + 1] < target) ++j;
    const double frac = (target - cum[j]) / (cum[j + 1] - cum[j]);
    nodes[n] = a + (static_cast<double>(j) + frac) * dx;
  }
  return nodes;
}

inline std::vector<double> graded_axis(const std::vector<double>& breaks,
                                       const std::vector<bool>& fine, double s0, double g,
                                       double cap) {
  std::vector<double> axis{breaks.front()};
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    const auto seg = graded_segment(breaks[s], breaks[s + 1], s0, g, cap, fine[s], fine[s + 1]);
    axis.insert(axis.end(), seg.begin() + 1, seg.end());
  }
  return axis;
}

struct SwirlCore {
  SwirlSolution sol;
  std::size_t gap_cells = 0;
};

/// Solves d_r(r^3 d_r w) + r^3 d_zz w = 0 for the angular velocity w = u/r,
/// which is the swirl equation rewritten so that the stress-free outer
/// conditions (d_r u - u/r = 0, d_z u = 0) are natural. Vertex-centred finite
/// volumes on the tensor grid give a symmetric M-matrix.
inline SwirlCore swirl_core(const DiskSpec& disk, double gap, double viscosity, double omega,
                            const SwirlGridSettings& s) {
  const double R = disk.radius;
  const double H = disk.thickness;
  const double f = s.refinement;
  const double s0 = gap / s.gap_cells / f;
  const double g = s.growth / f;
  const double cap = s.max_spacing / f;
  const double r_out = s.domain_factor * R;
  const double z_top = gap + H + s.domain_factor * R;
  SwirlCore core;
  auto& sol = core.sol;
  sol.omega = omega;
  sol.r = graded_axis({0.0, R, r_out}, {false, true, false}, s0, g, cap);
  sol.z = graded_axis({0.0, gap, gap + H, z_top}, {true, true, true, false}, s0, g, cap);
  const std::size_t nr = sol.r.size();
  const std::size_t nz = sol.z.size();
  const auto& r = sol.r;
  const auto& z = sol.z;
  std::size_t k_gap = 0;
  while (z[k_gap] < gap - 1e-15) ++k_gap;
  core.gap_cells = k_gap;

  constexpr double kRel = 1e-12;
  auto in_disk = [&](std::size_t i, std::size_t k) {
    return r[i] <= R * (1.0 + kRel) && z[k] >= gap * (1.0 - kRel) && z[k] <= (gap + H) * (1.0 + kRel);
  };
  sol.solid.assign(nr * nz, false);
  std::vector<double> w(nr * nz, 0.0);
  std::vector<Eigen::Index> unknown(nr * nz, -1);
  Eigen::Index n_free = 0;
  for (std::size_t k = 0; k < nz; ++k) {
    for (std::size_t i = 0; i < nr; ++i) {
      const std::size_t id = k * nr + i;
      if (in_disk(i, k)) {
        sol.solid[id] = true;
        w[id] = omega;
      } else if (k > 0) {
        unknown[id] = n_free++;
      }
    }
  }

  // Dual cell extents.
  std::vector<double> r_lo(nr);
  std::vector<double> r_hi(nr);
  for (std::size_t i = 0; i < nr; ++i) {
    r_lo[i] = (i == 0) ? r[0] : 0.5 * (r[i - 1] + r[i]);
    r_hi[i] = (i + 1 == nr) ? r[i] : 0.5 * (r[i] + r[i + 1]);
  }
  std::vector<double> dz_dual(nz);
  for (std::size_t k = 0; k < nz; ++k) {
    const double lo = (k == 0) ? z[0] : 0.5 * (z[k - 1] + z[k]);
    const double hi = (k + 1 == nz) ? z[k] : 0.5 * (z[k] + z[k + 1]);
    dz_dual[k] = hi - lo;
  }

  // Edge conductances of the discrete dissipation sum_e c_e (w_a - w_b)^2.
  struct Edge {
    std::size_t a;
    std::size_t b;
    double c;
  };
  std::vector<Edge> edges;
  edges.reserve(2 * nr * nz);
  for (std::size_t k = 0; k < nz; ++k) {
    for (std::size_t i = 0; i + 1 < nr; ++i) {
      const double rm = 0.5 * (r[i] + r[i + 1]);
      edges.push_back({k * nr + i, k * nr + i + 1, rm * rm * rm * dz_dual[k] / (r[i + 1] - r[i])});
    }
  }
  for (std::size_t k = 0; k + 1 < nz; ++k) {
    for (std::size_t i = 0; i < nr; ++i) {
      const double moment = 0.25 * (std::pow(r_hi[i], 4) - std::pow(r_lo[i], 4));
      edges.push_back({k * nr + i, (k + 1) * nr + i, moment / (z[k + 1] - z[k])});
    }
  }

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(4 * edges.size());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_free);
  for (const auto& e : edges) {
    const Eigen::Index ua = unknown[e.a];
    const Eigen::Index ub = unknown[e.b];
    if (ua >= 0) {
      trip.emplace_back(ua, ua, e.c);
      if (ub >= 0) {
        trip.emplace_back(ua, ub, -e.c);
      } else {
        rhs[ua] += e.c * w[e.b];
      }
    }
    if (ub >= 0) {
      trip.emplace_back(ub, ub, e.c);
      if (ua >= 0) {
        trip.emplace_back(ub, ua, -e.c);
      } else {
        rhs[ub] += e.c * w[e.a];
      }
    }
  }
  Eigen::SparseMatrix<double> a(n_free, n_free);
  a.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw SolverError("swirl_flow_solve: factorization failed");
  const Eigen::VectorXd x = ldlt.solve(rhs);
  const double rhs_norm = rhs.norm();
  sol.solver_residual = (rhs_norm > 0.0) ? (a * x - rhs).norm() / rhs_norm : 0.0;
  if (!(sol.solver_residual <= s.residual_limit)) {
    throw SolverError("swirl_flow_solve: residual " + std::to_string(sol.solver_residual) +
                          " above limit",
                      sol.solver_residual);
  }
  for (std::size_t id = 0; id < w.size(); ++id) {
    if (unknown[id] >= 0) w[id] = x[unknown[id]];
  }

  // Reaction on the disk nodes: the discrete traction integral, split by
  // the face each fluid-side edge leaves through.
  double bottom = 0.0;
  double top = 0.0;
  double rim = 0.0;
  for (const auto& e : edges) {
    const bool sa = sol.solid[e.a];
    const bool sb = sol.solid[e.b];
    if (sa == sb) continue;
    const std::size_t body = sa ? e.a : e.b;
    const std::size_t fluid = sa ? e.b : e.a;
    const double flux = e.c * (w[body] - w[fluid]);
    if (fluid / nr == body / nr) {
      rim += flux;
    } else if (fluid < body) {
      bottom += flux;
    } else {
      top += flux;
    }
  }
  const double scale = -2.0 * constants::pi * viscosity;
  sol.torque_bottom = scale * bottom;
  sol.torque_top = scale * top;
  sol.torque_rim = scale * rim;
  sol.torque = scale * (bottom + top + rim);

  // Dissipation 2 pi mu int r^3 |grad w|^2 dr dz over fluid cells, with the
  // cell-centre gradient of the bilinear interpolant.
  double diss = 0.0;
  for (std::size_t k = 0; k + 1 < nz; ++k) {
    for (std::size_t i = 0; i + 1 < nr; ++i) {
      const std::size_t c00 = k * nr + i;
      const std::size_t c10 = c00 + 1;
      const std::size_t c01 = c00 + nr;
      const std::size_t c11 = c01 + 1;
      if (sol.solid[c00] && sol.solid[c10] && sol.solid[c01] && sol.solid[c11]) continue;
      const double dr = r[i + 1] - r[i];
      const double dz = z[k + 1] - z[k];
      const double gr = 0.5 * ((w[c10] - w[c00]) + (w[c11] - w[c01])) / dr;
      const double gz = 0.5 * ((w[c01] - w[c00]) + (w[c11] - w[c10])) / dz;
      const double rm = 0.5 * (r[i] + r[i + 1]);
      // Exact r^3 moment over the cell keeps the axis cells accurate.
      const double moment = 0.25 * (std::pow(r[i + 1], 4) - std::pow(r[i], 4));
      diss += (moment * gr * gr + rm * rm * rm * dr * gz * gz) * dz;
    }
  }
  sol.dissipation = 2.0 * constants::pi * viscosity * diss;

  sol.u_phi.resize(nr * nz);
  for (std::size_t k = 0; k < nz; ++k) {
    for (std::size_t i = 0; i < nr; ++i) sol.u_phi[k * nr + i] = r[i] * w[k * nr + i];
  }
  return core;
}

}  // namespace detail

/// Axisymmetric Stokes swirl flow around the spinning disk at gap h above a
/// no-slip plane; the outer cylinder and lid are stress-free. Also solves
/// the half-refined grid to report the grid-convergence change.
inline SwirlSolution swirl_flow_solve(const DiskSpec& disk, double gap, const GasSpec& gas,
                                      double omega, const SwirlGridSettings& settings = {}) {
  disk.validate();
  if (!(gas.viscosity > 0.0)) throw DomainError("swirl_flow_solve: viscosity must be positive");
  if (!(gap > 0.0)) throw DomainError("swirl_flow_solve: gap must be positive");
  if (!(omega != 0.0) || !std::isfinite(omega)) throw DomainError("swirl_flow_solve: omega must be non-zero");
  if (!(settings.refinement > 0.0) || !(settings.growth > 0.0) || !(settings.max_spacing > 0.0)) {
    throw DomainError("swirl_flow_solve: grid settings must be positive");
  }
  if (!(settings.domain_factor >= 5.0)) {
    throw DomainError("swirl_flow_solve: outer boundary must lie at least 5 disk radii out");
  }
  if (settings.gap_cells * settings.refinement < 12.0) {
    throw DomainError("swirl_flow_solve: gap not resolved (need at least 12 cells across it)");
  }
  auto fine = detail::swirl_core(disk, gap, gas.viscosity, omega, settings);
  if (fine.gap_cells < 12) {
    throw DomainError("swirl_flow_solve: gap not resolved (" + std::to_string(fine.gap_cells) +
                      " cells across it)");
  }
  SwirlSolution sol = std::move(fine.sol);
  sol.damping_coefficient = std::abs(sol.torque / omega);
  sol.damping_rate = sol.damping_coefficient / disk.moment_of_inertia();
  SwirlGridSettings coarse = settings;
  coarse.refinement *= 0.5;
  coarse.gap_cells = std::max(settings.gap_cells, 12.0 / coarse.refinement);
  if (coarse.gap_cells == settings.gap_cells) {
    sol.coarse_torque = detail::swirl_core(disk, gap, gas.viscosity, omega, coarse).sol.torque;
    sol.grid_change = std::abs(sol.torque - sol.coarse_torque) / std::abs(sol.torque);
  }
  return sol;
}

/// Closed-form torque-per-omega of a Couette film of thickness h under the
/// bottom face, as a damping rate: pi mu R^4 / (2 h I).
inline double couette_gap_rate(const DiskSpec& disk, double gap, double viscosity) {
  return constants::pi * viscosity * std::pow(disk.radius, 4) / (2.0 * gap * disk.moment_of_inertia());
}

struct RoughEstimates {
  double gamma_free_molecular = 0.0;  // [Hz]
  double gamma_continuum = 0.0;       // [Hz]
};

/// Order-of-magnitude rates for a sphere of diameter D and density rho_s:
/// gamma_fm ~ (P / rho_s D) sqrt(2 m0 / (pi k_B T)), gamma_c ~ mu / (rho_s D^2).
inline RoughEstimates rough_estimates(double diameter, double density, const GasSpec& gas) {
  gas.validate();
  if (!(diameter > 0.0) || !(density > 0.0)) {
    throw DomainError("rough_estimates: diameter and density must be positive");
  }
  RoughEstimates out;
  out.gamma_free_molecular = gas.pressure / (density * diameter) *
                             std::sqrt(2.0 * gas.molecule_mass /
                                       (constants::pi * constants::k_B * gas.temperature));
  out.gamma_continuum = gas.viscosity / (density * diameter * diameter);
  return out;
}

/// Disk taken as a sphere of diameter 2R with the disk's bulk density.
inline RoughEstimates rough_estimates(const DiskSpec& disk, const GasSpec& gas) {
  disk.validate();
  return rough_estimates(2.0 * disk.radius, disk.mass / disk.volume(), gas);
}

struct GasCurvePoint {
  double pressure = 0.0;     // [Pa]
  double knudsen = 0.0;
  FlowRegime regime = FlowRegime::Continuum;
  double gamma_gas = 0.0;    // [Hz]
  double gamma_total = 0.0;  // [Hz]
};

/// Gas damping at one pressure: free-molecular above Kn = 10, the continuum
/// rate below Kn = 0.01, and in between log(gamma) linear in log(Kn) between
/// the two regime-edge values.
inline GasCurvePoint gas_damping_at(double pressure, const DiskSpec& disk, const GasSpec& gas_template,
                                    double gamma_continuum) {
  GasSpec gas = gas_template;
  gas.pressure = pressure;
  const RegimeReport rep = knudsen_regime(gas, disk.thickness);
  GasCurvePoint pt;
  pt.pressure = pressure;
  pt.knudsen = rep.knudsen;
  pt.regime = rep.regime;
  switch (rep.regime) {
    case FlowRegime::FreeMolecular:
      pt.gamma_gas = gamma_free_molecular(gas, disk).damping_rate;
      break;
    case FlowRegime::Continuum:
      pt.gamma_gas = gamma_continuum;
      break;
    case FlowRegime::Transition: {
      // Knudsen number is inversely proportional to pressure.
      GasSpec edge = gas;
      edge.pressure = pressure * rep.knudsen / kFreeMolecularKnudsen;
      const double g_fm = gamma_free_molecular(edge, disk).damping_rate;
      const double t = std::log(kFreeMolecularKnudsen / rep.knudsen) /
                       std::log(kFreeMolecularKnudsen / kContinuumKnudsen);
      pt.gamma_gas = std::exp((1.0 - t) * std::log(g_fm) + t * std::log(gamma_continuum));
      break;
    }
  }
  return pt;
}

/// gamma_total(P) = gamma_gas(P) + gamma_eddy over a pressure sweep.
inline std::vector<GasCurvePoint> gamma_total(const std::vector<double>& pressures, double gamma_eddy,
                                              const DiskSpec& disk, const GasSpec& gas_template,
                                              double gamma_continuum, unsigned threads = 0) {
  if (!(gamma_eddy >= 0.0)) throw DomainError("gamma_total: eddy floor must be non-negative");
  if (!(gamma_continuum > 0.0)) throw DomainError("gamma_total: continuum rate must be positive");
  for (double p : pressures) {
    if (!(p > 0.0)) throw DomainError("gamma_total: pressures must be positive");
  }
  return parallel_map(
      pressures,
      [&](double p) {
        GasCurvePoint pt = gas_damping_at(p, disk, gas_template, gamma_continuum);
        pt.gamma_total = pt.gamma_gas + gamma_eddy;
        return pt;
      },
      threads);
}

}  // namespace levrotor
