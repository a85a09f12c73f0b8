#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "CLI11.hpp"
#include "levrotor/config.hpp"
#include "levrotor/dynamics.hpp"
#include "levrotor/eddy.hpp"
#include "levrotor/error.hpp"
#include "levrotor/gas.hpp"
#include "levrotor/io.hpp"
#include "levrotor/levitation.hpp"
#include "levrotor/magnetostatics.hpp"

namespace levrotor {

enum class Command {
  Field,
  Levitate,
  EddySweep,
  VerifyZeroCurrent,
  MeshConvergence,
  GasCurve,
  Spindown,
  Analyze,
  TiltCollapse,
  SkinDepth,
  Compose,
};

struct CommandName {
  Command command;
  std::string_view name;
};

inline constexpr std::array<CommandName, 11> kCommands{{
    {Command::Field, "field"},
    {Command::Levitate, "levitate"},
    {Command::EddySweep, "eddy-sweep"},
    {Command::VerifyZeroCurrent, "verify-zero-current"},
    {Command::MeshConvergence, "mesh-convergence"},
    {Command::GasCurve, "gas-curve"},
    {Command::Spindown, "spindown"},
    {Command::Analyze, "analyze"},
    {Command::TiltCollapse, "tilt-collapse"},
    {Command::SkinDepth, "skin-depth"},
    {Command::Compose, "compose"},
}};

inline std::string_view to_string(Command c) {
  for (const auto& e : kCommands) {
    if (e.command == c) return e.name;
  }
  return "unknown";
}

enum class OutputFormat { Csv, Json };

struct RunFlags {
  std::filesystem::path out_dir = "out";
  unsigned threads = 0;  // 0: LEVROTOR_THREADS, else hardware
  OutputFormat format = OutputFormat::Csv;
  std::optional<std::filesystem::path> input;
  std::optional<std::pair<double, double>> window;  // [s]
};

struct OutputRecord {
  std::string file;
  std::string sha256;
};

struct RunReport {
  std::string version{kVersion};
  std::string command;
  std::string config_digest;
  std::uint64_t seed = 0;
  std::vector<OutputRecord> outputs;
  Json results;              // headline numbers of the command
  double wall_seconds = 0.0;

  /// Digest over everything except the timing.
  [[nodiscard]] std::string digest() const {
    Json j;
    j["version"] = version;
    j["command"] = command;
    j["config_sha256"] = config_digest;
    j["seed"] = seed;
    j["outputs"] = Json::array();
    for (const auto& o : outputs) j["outputs"].push_back({{"file", o.file}, {"sha256", o.sha256}});
    j["results"] = results;
    return sha256_hex(j.dump());
  }
};

/// Canonical JSON form of a resolved configuration, used for the digest.
inline Json config_json(const ExperimentConfig& c) {
  Json j;
  j["seed"] = c.seed;
  j["temperature_K"] = c.temperature;
  Json mags = Json::array();
  for (const auto& m : c.stack.magnets()) {
    mags.push_back({{"shape", m.shape == MagnetShape::Cylinder ? "cylinder" : "ring"},
                    {"outer_radius_m", m.outer_radius},
                    {"inner_radius_m", m.inner_radius},
                    {"height_m", m.height},
                    {"base_z_m", m.base_z},
                    {"remanence_T", m.remanence},
                    {"polarity", m.polarity}});
  }
  j["stack"] = mags;
  const auto& d = c.disk;
  j["disk"] = {{"radius_m", d.radius},       {"thickness_m", d.thickness},
               {"mass_kg", d.mass},           {"chi_parallel", d.chi_parallel},
               {"chi_perp", d.chi_perp},      {"sigma_parallel_S_per_m", d.sigma_parallel},
               {"sigma_perp_S_per_m", d.sigma_perp}};
  const auto& g = c.gas;
  j["gas"] = {{"pressure_Pa", g.pressure},          {"temperature_K", g.temperature},
              {"molecule_mass_kg", g.molecule_mass}, {"molecule_diameter_m", g.molecule_diameter},
              {"viscosity_Pa_s", g.viscosity},       {"accommodation", g.accommodation}};
  j["trap"] = {{"gap_m", c.trap.gap},
               {"vertical_frequency_Hz", c.trap.vertical_frequency},
               {"lateral_frequency_Hz", c.trap.lateral_frequency}};
  const auto& f = c.field_map;
  j["field_map"] = {{"r_max_m", f.r_max}, {"z_min_m", f.z_min}, {"z_max_m", f.z_max}, {"nr", f.nr}, {"nz", f.nz}};
  const auto& l = c.landscape;
  j["landscape"] = {{"offset_max_m", l.offset_max}, {"gap_min_m", l.gap_min}, {"gap_max_m", l.gap_max},
                    {"n_offset", l.n_offset},       {"n_gap", l.n_gap}};
  const auto& e = c.eddy;
  j["eddy"] = {{"mesh_resolution_m", e.resolution},
               {"omega_rad_per_s", e.omega},
               {"field_gap", e.use_measured_gap ? "measured" : "simulated"},
               {"offsets_m", e.offsets},
               {"fit_window_min_m", e.fit_window_min},
               {"convergence_resolutions_m", e.convergence_resolutions},
               {"perturbation", e.perturbation},
               {"skin_depth_omega_rad_per_s", e.skin_depth_omega},
               {"solver_tolerance", e.solver.tolerance},
               {"solver_max_iterations", e.solver.max_iterations},
               {"direct_limit", e.solver.direct_limit},
               {"quadrature", {e.quadrature.radial, e.quadrature.axial, e.quadrature.azimuthal}}};
  const auto& gc = c.gas_curve;
  j["gas_curve"] = {{"pressures_Pa", gc.pressures},
                    {"eddy_floor_Hz", gc.eddy_floor},
                    {"swirl_omega_rad_per_s", gc.swirl_omega},
                    {"linearity_omegas_rad_per_s", gc.linearity_omegas},
                    {"swirl_gap_cells", gc.swirl.gap_cells},
                    {"swirl_growth", gc.swirl.growth},
                    {"swirl_max_spacing_m", gc.swirl.max_spacing},
                    {"swirl_domain_factor", gc.swirl.domain_factor},
                    {"swirl_refinement", gc.swirl.refinement},
                    {"ambient_density_kg_per_m3", gc.ambient_density}};
  const auto& s = c.spindown;
  Json table = Json::array();
  for (const auto& [w, gm] : s.gamma_table) table.push_back({w, gm});
  j["spindown"] = {{"omega0_rad_per_s", s.omega0},
                   {"duration_s", s.duration},
                   {"sample_rate_Hz", s.sample_rate},
                   {"marker_radius_m", s.marker_radius},
                   {"position_noise_m", s.position_noise},
                   {"gamma_Hz", s.gamma},
                   {"gamma_table", table},
                   {"smoothing_sigma_s", s.smoothing_sigma},
                   {"window_start_s", s.window_start ? Json(*s.window_start) : Json()},
                   {"window_end_s", s.window_end ? Json(*s.window_end) : Json()}};
  const auto& t = c.tilt;
  j["tilt"] = {{"center_x_rad", t.center_x}, {"center_y_rad", t.center_y}, {"half_width_rad", t.half_width},
               {"points_per_axis", t.points_per_axis}, {"floor_Hz", t.floor}, {"log_noise", t.log_noise},
               {"c1", t.c1}, {"c2", t.c2}};
  j["compose"] = {{"residual_offset_m", c.compose.residual_offset}};
  return j;
}

inline std::string config_digest(const ExperimentConfig& c) { return sha256_hex(config_json(c).dump()); }

namespace detail {

inline constexpr double kRadToDeg = 180.0 / constants::pi;

/// Collects files for one command and writes them atomically.
class OutputSink {
 public:
  OutputSink(const RunFlags& flags, OutputMeta meta) : flags_(flags), meta_(std::move(meta)) {}

  void csv(const std::string& name, const CsvTable& table,
           std::vector<std::pair<std::string, std::string>> extra = {}) {
    OutputMeta m = meta_;
    m.extra = std::move(extra);
    emit(name + ".csv", render_csv(table, m));
  }

  void json(const std::string& name, const Json& body) { emit(name + ".json", render_json(body, meta_)); }

  /// A table in the selected format: CSV, or JSON rows under "rows".
  void table(const std::string& name, const CsvTable& table,
             std::vector<std::pair<std::string, std::string>> extra = {}) {
    if (flags_.format == OutputFormat::Csv) {
      csv(name, table, std::move(extra));
      return;
    }
    Json rows = Json::array();
    for (const auto& r : table.rows) {
      Json row;
      for (std::size_t i = 0; i < r.size(); ++i) {
        double v = 0.0;
        const auto res = std::from_chars(r[i].data(), r[i].data() + r[i].size(), v);
        if (res.ec == std::errc() && res.ptr == r[i].data() + r[i].size()) {
          row[table.header[i]] = v;
        } else {
          row[table.header[i]] = r[i];
        }
      }
      rows.push_back(row);
    }
    Json body;
    for (const auto& [k, v] : extra) body[k] = v;
    body["rows"] = rows;
    json(name, body);
  }

  [[nodiscard]] const std::vector<OutputRecord>& records() const noexcept { return records_; }

 private:
  void emit(const std::string& file, const std::string& content) {
    write_atomic(flags_.out_dir / file, content);
    records_.push_back({file, sha256_hex(content)});
  }

  const RunFlags& flags_;
  OutputMeta meta_;
  std::vector<OutputRecord> records_;
};

inline std::string n(double v) { return format_number(v); }

inline double eddy_gap(const ExperimentConfig& cfg) {
  if (cfg.eddy.use_measured_gap) return cfg.trap.gap;
  return equilibrium_height(cfg.disk, cfg.stack, cfg.eddy.quadrature);
}

inline PowerLawFit tilt_law(const ExperimentConfig& cfg) {
  PowerLawFit f;
  f.c1 = cfg.tilt.c1;
  f.c2 = cfg.tilt.c2;
  return f;
}

inline double omega_L(const ExperimentConfig& cfg) { return 2.0 * constants::pi * cfg.trap.lateral_frequency; }

/// Synthetic tilt scan around the configured centre with the configured law.
inline std::vector<TiltSample> synthetic_tilt_scan(const ExperimentConfig& cfg) {
  const auto& t = cfg.tilt;
  const PowerLawFit law = tilt_law(cfg);
  const double wl = omega_L(cfg);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<TiltSample> out;
  const std::size_t m = t.points_per_axis;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double tx = t.center_x + t.half_width * (2.0 * static_cast<double>(i) / static_cast<double>(m - 1) - 1.0);
      const double ty = t.center_y + t.half_width * (2.0 * static_cast<double>(j) / static_cast<double>(m - 1) - 1.0);
      const double d = constants::g * std::hypot(tx - t.center_x, ty - t.center_y) / (wl * wl);
      double gamma = t.floor + law(d);
      if (t.log_noise > 0.0) gamma *= std::exp(t.log_noise * noise(rng));
      out.push_back({tx * kRadToDeg, ty * kRadToDeg, gamma});
    }
  }
  return out;
}

inline CsvTable tilt_table(const std::vector<TiltSample>& scan) {
  CsvTable t{{"theta_x_deg", "theta_y_deg", "gamma_Hz"}, {}};
  for (const auto& s : scan) t.add({n(s.theta_x_deg), n(s.theta_y_deg), n(s.gamma)});
  return t;
}

inline SpinDownSettings spindown_settings(const ExperimentConfig& cfg) {
  SpinDownSettings s;
  s.omega0 = cfg.spindown.omega0;
  s.duration = cfg.spindown.duration;
  s.sample_rate = cfg.spindown.sample_rate;
  s.position_noise = cfg.spindown.position_noise;
  s.marker_radius = cfg.spindown.marker_radius;
  s.seed = cfg.seed;
  return s;
}

inline Json run_field(const ExperimentConfig& cfg, OutputSink& sink) {
  const auto& f = cfg.field_map;
  CsvTable t{{"r_m", "z_m", "Br_T", "Bz_T"}, {}};
  double peak = 0.0;
  for (std::size_t k = 0; k < f.nz; ++k) {
    const double z = f.z_min + (f.z_max - f.z_min) * static_cast<double>(k) / static_cast<double>(f.nz - 1);
    for (std::size_t i = 0; i < f.nr; ++i) {
      const double r = f.r_max * static_cast<double>(i) / static_cast<double>(f.nr - 1);
      const FieldVector b = stack_field(cfg.stack, r, cfg.stack.top_z() + z);
      peak = std::max(peak, std::sqrt(b.norm2()));
      t.add({n(r), n(z), n(b.B_r), n(b.B_z)});
    }
  }
  sink.table("field", t, {{"z_reference", "stack top"}});
  return {{"points", f.nr * f.nz}, {"max_abs_B_T", peak}};
}

inline Json run_levitate(const ExperimentConfig& cfg, OutputSink& sink) {
  const LevitationSolution sol = levitate(cfg.disk, cfg.stack, cfg.eddy.quadrature);
  const auto& l = cfg.landscape;
  CsvTable t{{"d_m", "h_m", "U_J"}, {}};
  for (std::size_t j = 0; j < l.n_gap; ++j) {
    const double h = l.gap_min + (l.gap_max - l.gap_min) * static_cast<double>(j) / static_cast<double>(l.n_gap - 1);
    for (std::size_t i = 0; i < l.n_offset; ++i) {
      const double d = l.offset_max * (2.0 * static_cast<double>(i) / static_cast<double>(l.n_offset - 1) - 1.0);
      t.add({n(d), n(h), n(total_energy(cfg.disk, cfg.stack, {d, h}, cfg.eddy.quadrature))});
    }
  }
  sink.table("energy_landscape", t);
  Json body;
  body["h_V_m"] = sol.h_V;
  body["omega_V_Hz"] = sol.omega_V / (2.0 * constants::pi);
  body["omega_L_Hz"] = sol.omega_L / (2.0 * constants::pi);
  body["curvature_vertical_J_per_m2"] = sol.curvature_vertical;
  body["curvature_lateral_J_per_m2"] = sol.curvature_lateral;
  body["measured"] = {{"h_V_m", cfg.trap.gap},
                      {"omega_V_Hz", cfg.trap.vertical_frequency},
                      {"omega_L_Hz", cfg.trap.lateral_frequency}};
  body["offset_per_0p1_deg_m"] = tilt_to_displacement(0.1 / kRadToDeg, omega_L(cfg)).offset;
  sink.json("levitate", body);
  std::cout << body.dump(2) << "\n";
  return {{"h_V_m", body["h_V_m"]}, {"omega_V_Hz", body["omega_V_Hz"]}, {"omega_L_Hz", body["omega_L_Hz"]}};
}

inline Json run_eddy_sweep(const ExperimentConfig& cfg, const RunFlags& flags, OutputSink& sink) {
  const double gap = eddy_gap(cfg);
  const OffsetSweep sweep = sweep_offset(cfg.disk, cfg.stack, gap, cfg.eddy.offsets, cfg.eddy.omega,
                                         cfg.eddy.resolution, cfg.eddy.fit_window_min, flags.threads,
                                         cfg.eddy.solver);
  CsvTable t{{"d_m", "gamma_Hz"}, {}};
  for (const auto& s : sweep.samples) t.add({n(s.offset), n(s.damping_rate)});
  sink.table("eddy_sweep", t);
  Json fit;
  fit["c1"] = sweep.fit.c1;
  fit["c2"] = sweep.fit.c2;
  fit["r2"] = sweep.fit.r_squared;
  fit["window_m"] = {sweep.fit.window_min, sweep.fit.window_max};
  fit["points"] = sweep.fit.points;
  fit["gap_m"] = gap;
  fit["omega_rad_per_s"] = cfg.eddy.omega;
  fit["mesh_resolution_m"] = cfg.eddy.resolution;
  sink.json("eddy_fit", fit);
  return {{"c1", sweep.fit.c1}, {"c2", sweep.fit.c2}, {"r2", sweep.fit.r_squared}};
}

inline Json run_verify_zero_current(const ExperimentConfig& cfg, const RunFlags& flags, OutputSink& sink) {
  Json body;
  Json analytic = Json::array();
  const double omega = cfg.eddy.omega;
  for (const ResemblingFieldParams& p : {ResemblingFieldParams{constants::pi / 6.0, 0.1, -4.0},
                                         ResemblingFieldParams{constants::pi / 6.0, 1.0, 0.0}}) {
    const ZeroCurrentReport r = verify_zero_current(p, omega);
    analytic.push_back({{"alpha", p.alpha},
                        {"beta", p.beta},
                        {"z0", p.z0},
                        {"max_J_over_sigma", r.max_current_over_sigma},
                        {"normalized_current", r.normalized_current},
                        {"max_curl", r.max_curl},
                        {"normalized_curl", r.normalized_curl},
                        {"grid_points", r.grid_points}});
  }
  body["analytic"] = analytic;
  const double gap = eddy_gap(cfg);
  const DiskMesh mesh = build_disk_mesh(cfg.disk.radius, cfg.eddy.resolution);
  const DampingResult centred = eddy_damping(mesh, cfg.disk, cfg.stack, gap, 0.0, omega, cfg.eddy.solver);
  body["discrete"] = {{"mesh_resolution_m", cfg.eddy.resolution},
                      {"nodes", mesh.node_count()},
                      {"gap_m", gap},
                      {"gamma_Hz", centred.damping_rate},
                      {"torque_N_m", centred.torque}};
  (void)flags;
  sink.json("zero_current", body);
  return {{"gamma_Hz", centred.damping_rate},
          {"normalized_current", std::max(analytic[0]["normalized_current"].get<double>(),
                                          analytic[1]["normalized_current"].get<double>())}};
}

inline Json run_mesh_convergence(const ExperimentConfig& cfg, const RunFlags& flags, OutputSink& sink) {
  const double gap = eddy_gap(cfg);
  const auto rows = mesh_convergence_study(cfg.disk, cfg.stack, gap, cfg.eddy.convergence_resolutions,
                                           cfg.eddy.omega, cfg.eddy.perturbation, cfg.seed, flags.threads,
                                           cfg.eddy.solver);
  Json body;
  body["gap_m"] = gap;
  body["perturbation"] = cfg.eddy.perturbation;
  body["rows"] = Json::array();
  bool monotone = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    body["rows"].push_back({{"resolution_m", r.resolution},
                            {"nodes", r.nodes},
                            {"cells", r.cells},
                            {"spurious_gamma_Hz", r.spurious_gamma},
                            {"polar_gamma_Hz", r.polar_gamma}});
    if (i > 0 && rows[i].spurious_gamma > rows[i - 1].spurious_gamma) monotone = false;
  }
  body["non_increasing"] = monotone;
  if (!rows.empty()) body["total_decrease"] = rows.front().spurious_gamma / rows.back().spurious_gamma;
  sink.json("mesh_convergence", body);
  return {{"non_increasing", monotone}};
}

inline Json run_gas_curve(const ExperimentConfig& cfg, const RunFlags& flags, OutputSink& sink) {
  const auto& gc = cfg.gas_curve;
  const double gap = cfg.trap.gap;
  const SwirlSolution swirl = swirl_flow_solve(cfg.disk, gap, cfg.gas, gc.swirl_omega, gc.swirl);
  const auto curve = gamma_total(gc.pressures, gc.eddy_floor, cfg.disk, cfg.gas, swirl.damping_rate, flags.threads);
  CsvTable t{{"P_Pa", "gamma_gas_Hz", "gamma_total_Hz", "regime"}, {}};
  for (const auto& p : curve) {
    t.add({n(p.pressure), n(p.gamma_gas), n(p.gamma_total), std::string(to_string(p.regime))});
  }
  sink.table("gas_curve", t);

  CsvTable field{{"r_m", "z_m", "u_phi_mps"}, {}};
  for (std::size_t k = 0; k < swirl.nz(); ++k) {
    for (std::size_t i = 0; i < swirl.nr(); ++i) field.add({n(swirl.r[i]), n(swirl.z[k]), n(swirl.at(i, k))});
  }
  sink.table("swirl_field", field);

  const auto torques = parallel_map(
      gc.linearity_omegas,
      [&](double w) {
        SwirlGridSettings single = gc.swirl;
        return swirl_flow_solve(cfg.disk, gap, cfg.gas, w, single).torque;
      },
      flags.threads);
  double r2 = 1.0;
  if (torques.size() >= 3) r2 = fit_line(gc.linearity_omegas, torques).r_squared;

  GasSpec unit = cfg.gas;
  unit.pressure = 1.0;
  const RoughEstimates rough = rough_estimates(cfg.disk, cfg.gas);
  Json body;
  body["gap_m"] = gap;
  body["continuum"] = {{"gamma_c_Hz", swirl.damping_rate},
                       {"torque_N_m", swirl.torque},
                       {"omega_rad_per_s", swirl.omega},
                       {"torque_bottom_N_m", swirl.torque_bottom},
                       {"torque_top_N_m", swirl.torque_top},
                       {"torque_rim_N_m", swirl.torque_rim},
                       {"grid_change", swirl.grid_change},
                       {"dissipation_W", swirl.dissipation},
                       {"couette_gap_Hz", couette_gap_rate(cfg.disk, gap, cfg.gas.viscosity)},
                       {"linearity_r2", r2}};
  body["free_molecular"] = {{"gamma_fm_per_Pa_Hz", gamma_free_molecular(unit, cfg.disk).damping_rate},
                            {"knudsen_at_1Pa", knudsen_regime(unit, cfg.disk.thickness).knudsen},
                            {"crossover_Pa", gc.eddy_floor > 0.0
                                                 ? Json(free_molecular_crossover(gc.eddy_floor, cfg.gas, cfg.disk))
                                                 : Json()}};
  body["rough"] = {{"gamma_fm_Hz", rough.gamma_free_molecular}, {"gamma_c_Hz", rough.gamma_continuum}};
  body["eddy_floor_Hz"] = gc.eddy_floor;
  sink.json("gas_summary", body);
  return {{"gamma_c_Hz", swirl.damping_rate}, {"linearity_r2", r2}, {"grid_change", swirl.grid_change}};
}

inline Json run_spindown(const ExperimentConfig& cfg, OutputSink& sink) {
  DampingModel model{cfg.spindown.gamma, cfg.spindown.gamma_table};
  const SpinDownTrace trace = simulate_spindown(model, spindown_settings(cfg));
  sink.csv("spindown", trace_table(trace),
           {{"marker_radius_m", n(trace.marker_radius)}, {"direction", std::to_string(trace.direction)}});
  return {{"samples", trace.samples.size()}};
}

inline Json run_analyze(const ExperimentConfig& cfg, const RunFlags& flags, OutputSink& sink) {
  const std::filesystem::path input = flags.input.value_or(flags.out_dir / "spindown.csv");
  const SpinDownTrace trace = read_trace_csv(input);
  std::optional<std::pair<double, double>> window = flags.window;
  if (!window && cfg.spindown.window_start && cfg.spindown.window_end) {
    window = std::make_pair(*cfg.spindown.window_start, *cfg.spindown.window_end);
  }
  if (!window) {
    throw ValidationError("analyze: a fit window is required (--window START END or spindown.window_start/end)",
                          "spindown.window_start");
  }
  const OmegaSeries w = smooth_and_differentiate(extract_phase(trace), cfg.spindown.smoothing_sigma);
  const GammaEstimate est = estimate_gamma(w, {window->first, window->second});
  const double mid = 0.5 * (window->first + window->second);
  const GammaEstimate early = estimate_gamma(w, {window->first, mid});
  const GammaEstimate late = estimate_gamma(w, {mid, window->second});

  CsvTable t{{"t_s", "omega_rad_per_s", "interior"}, {}};
  for (std::size_t i = 0; i < w.t.size(); ++i) t.add({n(w.t[i]), n(w.omega[i]), w.interior[i] ? "1" : "0"});
  sink.table("omega", t, {{"sigma_t_s", n(w.sigma_t)}});

  Json body;
  body["gamma_Hz"] = est.gamma;
  body["stderr"] = est.stderr_gamma;
  body["r2"] = est.r_squared;
  body["window_s"] = {est.window_start, est.window_end};
  body["points"] = est.points;
  body["ln_omega_intercept"] = est.ln_omega_intercept;
  body["sigma_t_s"] = w.sigma_t;
  body["sensitivity"] = {{"first_half_gamma_Hz", early.gamma},
                         {"second_half_gamma_Hz", late.gamma},
                         {"relative_spread", std::abs(early.gamma - late.gamma) / est.gamma}};
  body["input"] = input.filename().string();
  sink.json("analysis", body);
  return {{"gamma_Hz", est.gamma}, {"r2", est.r_squared}};
}

inline Json run_tilt_collapse(const ExperimentConfig& cfg, const RunFlags& flags, OutputSink& sink) {
  std::vector<TiltSample> scan;
  if (flags.input) {
    scan = read_tilt_csv(*flags.input);
  } else {
    scan = synthetic_tilt_scan(cfg);
    sink.csv("tilt_scan", tilt_table(scan));
  }
  const TiltScanResult fit = tilt_scan_collapse(scan, {omega_L(cfg)});
  CsvTable t{{"dtheta_deg", "gamma_Hz", "model_Hz"}, {}};
  for (const auto& p : fit.profile) t.add({n(p.delta_theta_deg), n(p.gamma), n(p.model)});
  sink.table("tilt_profile", t);
  PowerLawFit law;
  law.c1 = fit.c1;
  law.c2 = fit.c2;
  Json body;
  body["center_x_deg"] = fit.center_x_deg;
  body["center_y_deg"] = fit.center_y_deg;
  body["c1"] = fit.c1;
  body["c2"] = fit.c2;
  body["floor_Hz"] = fit.floor;
  body["rms_log_residual"] = fit.rms_log_residual;
  body["iterations"] = fit.iterations;
  body["converged"] = fit.converged;
  body["samples"] = scan.size();
  body["omega_L_rad_per_s"] = omega_L(cfg);
  sink.json("tilt_collapse", body);
  return {{"center_x_deg", fit.center_x_deg}, {"center_y_deg", fit.center_y_deg}};
}

inline Json run_skin_depth(const ExperimentConfig& cfg, OutputSink& sink) {
  const double w = cfg.eddy.skin_depth_omega;
  const double dp = skin_depth(cfg.disk.sigma_parallel, constants::mu_0, w);
  const double dz = skin_depth(cfg.disk.sigma_perp, constants::mu_0, w);
  Json body;
  body["omega_ac_rad_per_s"] = w;
  body["delta_parallel_m"] = dp;
  body["delta_perp_m"] = dz;
  body["ratio"] = dz / dp;
  body["thickness_over_delta_parallel"] = cfg.disk.thickness / dp;
  sink.json("skin_depth", body);
  return {{"ratio", dz / dp}};
}

inline Json run_compose(const ExperimentConfig& cfg, const RunFlags& flags, OutputSink& sink) {
  const std::filesystem::path fit_path = flags.out_dir / "eddy_fit.json";
  const std::filesystem::path curve_path = flags.out_dir / "gas_curve.csv";
  Json fit_doc;
  try {
    fit_doc = Json::parse(read_file(fit_path));
  } catch (const Json::exception& e) {
    throw IoError(fit_path.string() + ": " + e.what());
  }
  PowerLawFit law;
  try {
    law.c1 = fit_doc.at("c1").get<double>();
    law.c2 = fit_doc.at("c2").get<double>();
  } catch (const Json::exception& e) {
    throw IoError(fit_path.string() + ": " + e.what());
  }
  const CsvDocument curve = parse_csv(read_file(curve_path), curve_path.string());
  require_header(curve, {"P_Pa", "gamma_gas_Hz", "gamma_total_Hz", "regime"}, curve_path.string());
  const double floor = law(cfg.compose.residual_offset);
  CsvTable t{{"P_Pa", "gamma_gas_Hz", "gamma_eddy_Hz", "gamma_total_Hz", "regime"}, {}};
  double crossover = std::numeric_limits<double>::quiet_NaN();
  double prev_p = 0.0;
  double prev_g = 0.0;
  for (std::size_t i = 0; i < curve.rows.size(); ++i) {
    const auto& r = curve.rows[i];
    const std::string where = curve_path.string() + ": line " + std::to_string(curve.lines[i]);
    const double p = parse_number(r[0], where);
    const double g = parse_number(r[1], where);
    t.add({r[0], r[1], n(floor), n(g + floor), r[3]});
    if (i > 0 && std::isnan(crossover) && prev_g < floor && g >= floor) {
      const double s = (std::log(floor) - std::log(prev_g)) / (std::log(g) - std::log(prev_g));
      crossover = std::exp(std::log(prev_p) + s * (std::log(p) - std::log(prev_p)));
    }
    prev_p = p;
    prev_g = g;
  }
  sink.table("compose", t);
  const double wl = omega_L(cfg);
  Json body;
  body["eddy_fit"] = {{"c1", law.c1}, {"c2", law.c2}};
  body["residual_offset_m"] = cfg.compose.residual_offset;
  body["gamma_eddy_Hz"] = floor;
  body["crossover_Pa"] = std::isnan(crossover) ? Json() : Json(crossover);
  body["thermal"] = {{"x_rms_m", thermal_rms_displacement(cfg.temperature, cfg.disk.mass, wl)},
                     {"gamma_Hz", thermal_damping_rate(cfg.temperature, cfg.disk.mass, wl, law)}};
  body["rotor_level_spacing_J"] = rotor_level_spacing(cfg.disk.moment_of_inertia(), 0);
  sink.json("compose_summary", body);
  return {{"gamma_eddy_Hz", floor}, {"crossover_Pa", body["crossover_Pa"]}};
}

}  // namespace detail

/// Runs one command and writes its outputs plus a run report.
inline RunReport dispatch(Command command, const ExperimentConfig& cfg, const RunFlags& flags) {
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.command = std::string(to_string(command));
  report.config_digest = config_digest(cfg);
  report.seed = cfg.seed;
  detail::OutputSink sink(flags, {report.command, report.config_digest, cfg.seed, {}});
  switch (command) {
    case Command::Field: report.results = detail::run_field(cfg, sink); break;
    case Command::Levitate: report.results = detail::run_levitate(cfg, sink); break;
    case Command::EddySweep: report.results = detail::run_eddy_sweep(cfg, flags, sink); break;
    case Command::VerifyZeroCurrent: report.results = detail::run_verify_zero_current(cfg, flags, sink); break;
    case Command::MeshConvergence: report.results = detail::run_mesh_convergence(cfg, flags, sink); break;
    case Command::GasCurve: report.results = detail::run_gas_curve(cfg, flags, sink); break;
    case Command::Spindown: report.results = detail::run_spindown(cfg, sink); break;
    case Command::Analyze: report.results = detail::run_analyze(cfg, flags, sink); break;
    case Command::TiltCollapse: report.results = detail::run_tilt_collapse(cfg, flags, sink); break;
    case Command::SkinDepth: report.results = detail::run_skin_depth(cfg, sink); break;
    case Command::Compose: report.results = detail::run_compose(cfg, flags, sink); break;
  }
  report.outputs = sink.records();
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Json j;
  j["version"] = report.version;
  j["command"] = report.command;
  j["config_sha256"] = report.config_digest;
  j["seed"] = report.seed;
  j["outputs"] = Json::array();
  for (const auto& o : report.outputs) j["outputs"].push_back({{"file", o.file}, {"sha256", o.sha256}});
  j["results"] = report.results;
  j["report_digest"] = report.digest();
  j["wall_seconds"] = report.wall_seconds;
  write_atomic(flags.out_dir / ("run_report_" + report.command + ".json"), j.dump(2) + "\n");
  return report;
}

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitSolver = 3;

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Solver: return kExitSolver;
    case ErrorKind::Domain:
    case ErrorKind::Geometry:
    case ErrorKind::Validation:
    case ErrorKind::Io: return kExitValidation;
  }
  return kExitSolver;
}

/// Command-line entry point; returns the process exit code.
inline int run_cli(int argc, char** argv, std::ostream& err = std::cerr) {
  CLI::App app{"Levitated rotor damping toolkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1, 1);
  std::string config_path;
  RunFlags flags;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string format = "csv";
  std::string input;
  std::vector<double> window;

  app.add_option("--config", config_path, "configuration file (YAML)")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "override the configured random seed");
  app.add_option("--threads", threads, "worker threads (default: LEVROTOR_THREADS, else hardware)")
      ->check(CLI::PositiveNumber);
  app.add_option("--format", format, "table format")->check(CLI::IsMember({"csv", "json"}));

  std::vector<std::pair<CLI::App*, Command>> subs;
  for (const auto& e : kCommands) {
    CLI::App* sub = app.add_subcommand(std::string(e.name));
    sub->fallthrough();
    if (e.command == Command::Analyze || e.command == Command::TiltCollapse) {
      sub->add_option("--input", input, "input CSV")->check(CLI::ExistingFile);
    }
    if (e.command == Command::Analyze) {
      sub->add_option("--window", window, "fit window START END [s]")->expected(2);
    }
    subs.emplace_back(sub, e.command);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  Command command = Command::Field;
  for (const auto& [sub, c] : subs) {
    if (sub->parsed()) command = c;
  }
  flags.out_dir = out_dir;
  flags.threads = threads;
  flags.format = format == "json" ? OutputFormat::Json : OutputFormat::Csv;
  if (!input.empty()) flags.input = input;
  if (!window.empty()) {
    if (!(window[1] > window[0])) {
      err << "error: --window END must exceed START\n";
      return kExitUsage;
    }
    flags.window = std::make_pair(window[0], window[1]);
  }

  try {
    ExperimentConfig cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    const RunReport report = dispatch(command, cfg, flags);
    err << report.command << ": wrote " << report.outputs.size() << " file(s) to " << flags.out_dir.string()
        << " in " << report.wall_seconds << " s\n";
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitSolver;
  }
}

}  // namespace levrotor
