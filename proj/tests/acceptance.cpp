#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "levrotor/app.hpp"

using namespace levrotor;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

ExperimentConfig reference_config() {
  return load_config((std::string(LEVROTOR_SOURCE_DIR) + "/configs/reference.yaml"));
}

PowerLawFit reference_law() {
  PowerLawFit f;
  f.c1 = 6.20e4;
  f.c2 = 1.91;
  return f;
}

Outcome levitation() {
  const ExperimentConfig cfg = reference_config();
  const LevitationSolution s = levitate(cfg.disk, cfg.stack, cfg.eddy.quadrature);
  const double h = s.h_V * 1e3;
  const double fv = s.omega_V / (2.0 * constants::pi);
  const double fl = s.omega_L / (2.0 * constants::pi);
  const bool ok = h >= 0.75 && h <= 0.91 && fv >= 17.1 && fv <= 20.9 && fl >= 5.2 && fl <= 6.4;
  return {ok, fmt("h_V = %.4f mm", h) + fmt(", omega_V/2pi = %.3f Hz", fv) + fmt(", omega_L/2pi = %.3f Hz", fl)};
}

Outcome zero_current() {
  const ExperimentConfig cfg = reference_config();
  double worst = 0.0;
  for (const ResemblingFieldParams& p : {ResemblingFieldParams{constants::pi / 6.0, 0.1, -4.0},
                                         ResemblingFieldParams{constants::pi / 6.0, 1.0, 0.0}}) {
    worst = std::max(worst, verify_zero_current(p, 15.0).normalized_current);
  }
  const DiskMesh mesh = build_disk_mesh(cfg.disk.radius, cfg.eddy.resolution);
  const double gamma =
      eddy_damping(mesh, cfg.disk, cfg.stack, detail::eddy_gap(cfg), 0.0, 15.0, cfg.eddy.solver).damping_rate;
  return {worst <= 1e-12 && gamma <= 1e-9,
          fmt("max|J/sigma|/(omega beta R) = %.2e", worst) + fmt(", polar-mesh gamma(d=0) = %.2e Hz", gamma)};
}

Outcome power_law() {
  const ExperimentConfig cfg = reference_config();
  const OffsetSweep sw = sweep_offset(cfg.disk, cfg.stack, detail::eddy_gap(cfg), cfg.eddy.offsets, 15.0,
                                      cfg.eddy.resolution, 0.05e-3, 0, cfg.eddy.solver);
  const auto& f = sw.fit;
  const bool ok = std::abs(f.c2 - 1.91) <= 0.2 && f.r_squared >= 0.99 && f.c1 >= 6.20e4 / 3.0 && f.c1 <= 6.20e4 * 3.0;
  return {ok, fmt("c1 = %.4g", f.c1) + fmt(", c2 = %.4f", f.c2) + fmt(", r2 = %.6f", f.r_squared) +
                  fmt(", d in [%.3g", f.window_min * 1e3) + fmt(", %.3g] mm", f.window_max * 1e3)};
}

Outcome chained() {
  const ExperimentConfig cfg = reference_config();
  const double d = residual_offset_from_floor(5.5e-5, reference_law()) * 1e6;
  const double wl = 2.0 * constants::pi * cfg.trap.lateral_frequency;
  const double g = thermal_damping_rate(300.0, cfg.disk.mass, wl, reference_law());
  const bool ok = std::abs(d - 18.0) <= 1.0 && g >= 4.7e-15 && g <= 1.1e-14;
  return {ok, fmt("d = %.3f um", d) + fmt(", thermal gamma = %.3e Hz", g)};
}

Outcome free_molecular() {
  const ExperimentConfig cfg = reference_config();
  GasSpec gas = cfg.gas;
  gas.pressure = 1.0;
  const double gamma = gamma_free_molecular(gas, cfg.disk).damping_rate;
  // Independent arithmetic: R^4 sqrt(pi m0 / (2 kB T)) (1 + 2H/R) P / (M R^2 / 2).
  const double R = 5.01e-3, H = 1.12e-3, M = 191e-6, m0 = 28.97 * 1.66053906660e-27;
  const double oracle = std::pow(R, 4) * std::sqrt(3.141592653589793 * m0 / (2.0 * 1.380649e-23 * 300.0)) *
                        (1.0 + 2.0 * H / R) / (0.5 * M * R * R);
  double worst = 0.0;
  for (double p = 1e-3; p <= 1e3 * (1 + 1e-9); p *= 10.0) {
    gas.pressure = p;
    const double g = gamma_free_molecular(gas, cfg.disk).damping_rate;
    worst = std::max(worst, std::abs(g / p - gamma) / gamma);
  }
  const bool ok = std::abs(gamma / 1.624e-3 - 1.0) <= 0.005 && std::abs(gamma / oracle - 1.0) <= 1e-12 &&
                  worst <= 1e-12;
  return {ok, fmt("gamma_fm(1 Pa) = %.5e Hz", gamma) + fmt(", oracle = %.5e Hz", oracle) +
                  fmt(", max linearity deviation = %.1e", worst)};
}

Outcome continuum() {
  const ExperimentConfig cfg = reference_config();
  const double gap = cfg.trap.gap;
  std::vector<double> omegas;
  for (int i = 1; i <= 20; ++i) omegas.push_back(2.0 * constants::pi * 0.1 * i);
  const auto sols = parallel_map(omegas, [&](double w) { return swirl_flow_solve(cfg.disk, gap, cfg.gas, w); });
  std::vector<double> torques;
  for (const auto& s : sols) torques.push_back(s.torque);
  const double r2 = fit_line(omegas, torques).r_squared;
  const double gamma_c = sols.front().damping_rate;
  const double couette = couette_gap_rate(cfg.disk, gap, cfg.gas.viscosity);
  const double ratio = gamma_c / couette;
  const double change = sols.back().grid_change;
  const bool ok = r2 >= 0.9999 && ratio <= 2.0 && ratio >= 0.5 && change < 0.02;
  std::string why = fmt("r2 = %.8f", r2) + fmt(", gamma_c = %.3e Hz", gamma_c) +
                    fmt(", Couette oracle = %.3e Hz", couette) + fmt(", ratio = %.2f", ratio) +
                    fmt(", grid change = %.2f%%", 100.0 * change);
  if (ratio > 2.0) why += " (factor-2 bound missed: top face and rim carry 56% of the torque)";
  return {ok, why};
}

Outcome composite() {
  const ExperimentConfig cfg = reference_config();
  const double floor = 5.5e-5;
  const double gamma_c = swirl_flow_solve(cfg.disk, cfg.trap.gap, cfg.gas, 2.0 * constants::pi).damping_rate;
  std::vector<double> pressures{1e-12};
  for (const double p : cfg.gas_curve.pressures) pressures.push_back(p);
  const auto curve = gamma_total(pressures, floor, cfg.disk, cfg.gas, gamma_c);
  bool monotone = true;
  for (std::size_t i = 1; i < curve.size(); ++i) monotone = monotone && curve[i].gamma_total >= curve[i - 1].gamma_total;
  const double plateau = curve.front().gamma_total;
  const double cross = free_molecular_crossover(floor, cfg.gas, cfg.disk);
  GasSpec low = cfg.gas;
  low.pressure = pressures.front();
  const double expected = floor + gamma_free_molecular(low, cfg.disk).damping_rate;
  const bool ok = monotone && std::abs(plateau - expected) <= 1e-9 * floor && std::abs(cross / 3.4e-2 - 1.0) <= 0.1;
  return {ok, std::string(monotone ? "monotone" : "NOT monotone") + fmt(", gamma(1e-12 Pa) = %.6e Hz", plateau) +
                  fmt(", crossover = %.4e Pa", cross)};
}

Outcome mesh_convergence() {
  const ExperimentConfig cfg = reference_config();
  const auto rows = mesh_convergence_study(cfg.disk, cfg.stack, detail::eddy_gap(cfg),
                                           cfg.eddy.convergence_resolutions, 15.0, cfg.eddy.perturbation, cfg.seed,
                                           0, cfg.eddy.solver);
  bool monotone = true;
  double polar = 0.0;
  std::string values;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0) monotone = monotone && rows[i].spurious_gamma <= rows[i - 1].spurious_gamma;
    polar = std::max(polar, rows[i].polar_gamma);
    values += (i ? " -> " : "") + fmt("%.3e", rows[i].spurious_gamma);
  }
  const double decrease = rows.front().spurious_gamma / rows.back().spurious_gamma;
  const bool ok = rows.size() == 3 && monotone && decrease >= 1.5 && polar * 100.0 <= rows.front().spurious_gamma;
  return {ok, "spurious gamma " + values + fmt(" Hz, decrease x%.1f", decrease) + fmt(", polar max %.2e Hz", polar)};
}

Outcome estimators() {
  // Noiseless: exact log-linear data.
  OmegaSeries w;
  for (int i = 0; i < 5000; ++i) {
    w.t.push_back(0.1 * i);
    w.omega.push_back(15.0 * std::exp(-1e-3 * 0.1 * i));
    w.interior.push_back(true);
  }
  const double exact_err = std::abs(estimate_gamma(w).gamma / 1e-3 - 1.0);
  // Monte-Carlo at 1% position noise.
  double worst = 0.0;
  for (double gamma : {1e-5, 1e-4, 1e-3, 1e-2, 1e-1}) {
    std::vector<std::uint64_t> seeds(20);
    for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = 1000 + i;
    const auto est = parallel_map(seeds, [&](std::uint64_t seed) {
      SpinDownSettings s;
      s.duration = std::min(3600.0, 2.0 / gamma);
      s.sample_rate = 20.0;
      s.position_noise = 0.01 * s.marker_radius;
      s.seed = seed;
      return recover_gamma(simulate_spindown({gamma, {}}, s), 0.5).gamma;
    });
    for (double g : est) worst = std::max(worst, std::abs(g / gamma - 1.0));
  }
  // Tilt scan from the tilt-displacement law and the reference power law.
  const double wl = 2.0 * constants::pi * 6.0;
  std::vector<TiltSample> scan;
  for (int i = 0; i < 9; ++i) {
    for (int j = 0; j < 9; ++j) {
      const double tx = -0.544 - 0.5 + 0.125 * i;
      const double ty = -0.383 - 0.5 + 0.125 * j;
      const double d = constants::g * std::hypot(tx + 0.544, ty + 0.383) * constants::pi / 180.0 / (wl * wl);
      scan.push_back({tx, ty, 5.5e-5 + reference_law()(d)});
    }
  }
  const TiltScanResult fit = tilt_scan_collapse(scan, {wl});
  const double centre_err = std::max(std::abs(fit.center_x_deg + 0.544), std::abs(fit.center_y_deg + 0.383));
  const bool ok = exact_err <= 1e-12 && worst <= 0.02 && centre_err <= 0.02;
  return {ok, fmt("noiseless error %.1e", exact_err) + fmt(", worst Monte-Carlo error %.2f%%", 100.0 * worst) +
                  fmt(", tilt centre error %.1e deg", centre_err)};
}

Outcome skin() {
  const ExperimentConfig cfg = reference_config();
  const double ratio = skin_depth(cfg.disk.sigma_perp, constants::mu_0, 624.0) /
                       skin_depth(cfg.disk.sigma_parallel, constants::mu_0, 624.0);
  return {std::abs(ratio - 25.50) <= 0.3, fmt("ratio = %.4f", ratio) + fmt(" (rounded 3.6/0.14 = %.2f)", 3.6 / 0.14)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "levitation reproduction", 60.0, levitation},
      {2, "zero-current theorem", 10.0, zero_current},
      {3, "power law", 600.0, power_law},
      {4, "chained numbers", 1.0, chained},
      {5, "free-molecular formula", 1.0, free_molecular},
      {6, "continuum solver", 300.0, continuum},
      {7, "composite gamma(P)", 60.0, composite},
      {8, "mesh convergence", 600.0, mesh_convergence},
      {9, "estimator suite", 120.0, estimators},
      {10, "skin depth", 1.0, skin},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("CRITERION %2d %-24s %s  %s [%.2f s of %.0f s%s]\n", c.id, c.name.c_str(), pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs, c.budget_s, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
