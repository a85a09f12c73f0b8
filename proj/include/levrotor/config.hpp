#pragma once

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "levrotor/constants.hpp"
#include "levrotor/eddy.hpp"
#include "levrotor/error.hpp"
#include "levrotor/gas.hpp"
#include "levrotor/levitation.hpp"
#include "levrotor/magnetostatics.hpp"

namespace levrotor {

/// Unit suffixes accepted for one physical quantity, with their SI factors.
struct UnitSet {
  std::string_view quantity;
  std::vector<std::pair<std::string_view, double>> suffixes;
};

namespace units {

inline const UnitSet& length() {
  static const UnitSet u{"length", {{"m", 1.0}, {"mm", 1e-3}, {"um", 1e-6}, {"nm", 1e-9}}};
  return u;
}
inline const UnitSet& mass() {
  static const UnitSet u{"mass", {{"kg", 1.0}, {"g", 1e-3}, {"mg", 1e-6}}};
  return u;
}
inline const UnitSet& molecular_mass() {
  static const UnitSet u{"molecular mass", {{"kg", 1.0}, {"amu", constants::amu}}};
  return u;
}
inline const UnitSet& flux_density() {
  static const UnitSet u{"flux density", {{"T", 1.0}, {"mT", 1e-3}}};
  return u;
}
inline const UnitSet& conductivity() {
  static const UnitSet u{"conductivity", {{"S_per_m", 1.0}}};
  return u;
}
inline const UnitSet& pressure() {
  static const UnitSet u{"pressure", {{"Pa", 1.0}, {"mbar", 100.0}, {"Torr", 101325.0 / 760.0}}};
  return u;
}
inline const UnitSet& temperature() {
  static const UnitSet u{"temperature", {{"K", 1.0}}};
  return u;
}
inline const UnitSet& viscosity() {
  static const UnitSet u{"viscosity", {{"Pa_s", 1.0}}};
  return u;
}
inline const UnitSet& density() {
  static const UnitSet u{"density", {{"kg_per_m3", 1.0}}};
  return u;
}
inline const UnitSet& frequency() {
  static const UnitSet u{"frequency", {{"Hz", 1.0}}};
  return u;
}
inline const UnitSet& angular_velocity() {
  static const UnitSet u{"angular velocity", {{"rad_per_s", 1.0}}};
  return u;
}
inline const UnitSet& time() {
  static const UnitSet u{"time", {{"s", 1.0}, {"ms", 1e-3}, {"min", 60.0}, {"h", 3600.0}}};
  return u;
}
inline const UnitSet& angle() {
  static const UnitSet u{"angle", {{"rad", 1.0}, {"deg", constants::pi / 180.0}}};
  return u;
}

}  // namespace units

/// Reads one YAML mapping, tracks which keys were consumed and reports
/// problems with the dotted key path and source position.
class ConfigSection {
 public:
  ConfigSection(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (!node_.IsMap()) fail(path_, "must be a mapping", node_);
  }

  [[nodiscard]] const std::string& path() const noexcept { return path_; }

  [[nodiscard]] bool has(std::string_view name) const { return static_cast<bool>(get(std::string(name))); }

  /// True when `name` appears bare or with any of the set's suffixes.
  [[nodiscard]] bool has_quantity(std::string_view name, const UnitSet& set) const {
    if (has(name)) return true;
    for (const auto& [sfx, f] : set.suffixes) {
      if (has(std::string(name) + "_" + std::string(sfx))) return true;
    }
    return false;
  }

  /// Quantity given as `name_<suffix>`, converted to SI.
  double quantity(std::string_view name, const UnitSet& set, std::optional<double> fallback = std::nullopt) {
    const std::string bare(name);
    if (get(bare)) {
      used_.insert(bare);
      std::string options;
      for (const auto& [sfx, f] : set.suffixes) {
        options += (options.empty() ? "" : ", ") + bare + "_" + std::string(sfx);
      }
      fail(key(bare), "is a " + std::string(set.quantity) + " and needs a unit suffix (" + options + ")",
           get(bare));
    }
    std::optional<double> value;
    std::string found;
    for (const auto& [sfx, factor] : set.suffixes) {
      const std::string k = bare + "_" + std::string(sfx);
      if (!get(k)) continue;
      used_.insert(k);
      if (value) fail(key(k), "duplicates " + key(found), get(k));
      value = to_double(get(k), key(k)) * factor;
      found = k;
    }
    if (value) return *value;
    if (fallback) return *fallback;
    fail(key(bare), "is required", node_);
  }

  /// Dimensionless number.
  double number(std::string_view name, std::optional<double> fallback = std::nullopt) {
    const std::string k(name);
    if (get(k)) {
      used_.insert(k);
      return to_double(get(k), key(k));
    }
    if (fallback) return *fallback;
    fail(key(k), "is required", node_);
  }

  long long integer(std::string_view name, std::optional<long long> fallback = std::nullopt) {
    const std::string k(name);
    if (get(k)) {
      used_.insert(k);
      const YAML::Node v = get(k);
      long long out = 0;
      if (!v.IsScalar() || !YAML::convert<long long>::decode(v, out)) fail(key(k), "must be an integer", v);
      return out;
    }
    if (fallback) return *fallback;
    fail(key(k), "is required", node_);
  }

  std::string text(std::string_view name, std::optional<std::string> fallback = std::nullopt) {
    const std::string k(name);
    if (get(k)) {
      used_.insert(k);
      if (!get(k).IsScalar()) fail(key(k), "must be a string", get(k));
      return get(k).as<std::string>();
    }
    if (fallback) return *fallback;
    fail(key(k), "is required", node_);
  }

  std::optional<ConfigSection> child(std::string_view name) {
    const std::string k(name);
    if (!get(k)) return std::nullopt;
    used_.insert(k);
    return ConfigSection(get(k), key(k));
  }

  ConfigSection required_child(std::string_view name) {
    auto c = child(name);
    if (!c) fail(key(std::string(name)), "is required", node_);
    return std::move(*c);
  }

  /// Raw sequence under `name`, empty when absent.
  std::vector<YAML::Node> sequence(std::string_view name) {
    const std::string k(name);
    if (!get(k)) return {};
    used_.insert(k);
    const YAML::Node v = get(k);
    if (!v.IsSequence()) fail(key(k), "must be a list", v);
    return {v.begin(), v.end()};
  }

  /// List of quantities under `name_<suffix>`.
  std::optional<std::vector<double>> quantity_list(std::string_view name, const UnitSet& set) {
    const std::string bare(name);
    for (const auto& [sfx, factor] : set.suffixes) {
      const std::string k = bare + "_" + std::string(sfx);
      if (!get(k)) continue;
      used_.insert(k);
      const YAML::Node v = get(k);
      if (!v.IsSequence()) fail(key(k), "must be a list", v);
      std::vector<double> out;
      for (const auto& item : v) out.push_back(to_double(item, key(k)) * factor);
      return out;
    }
    if (get(bare) && get(bare).IsSequence()) {
      used_.insert(bare);
      fail(key(bare), "is a list of " + std::string(set.quantity) + " values and needs a unit suffix",
           get(bare));
    }
    return std::nullopt;
  }

  /// Rejects keys nobody asked for.
  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      const std::string k = it->first.as<std::string>();
      if (!used_.count(k)) fail(key(k), "is not a recognized key", it->first);
    }
  }

  [[noreturn]] void invalid(std::string_view name, const std::string& why) const {
    const std::string k(name);
    fail(key(k), why, get(k) ? get(k) : node_);
  }

  [[noreturn]] static void fail(const std::string& key_path, const std::string& why, const YAML::Node& at) {
    std::string where;
    if (at.Mark().line >= 0) {
      where = " (line " + std::to_string(at.Mark().line + 1) + ", column " + std::to_string(at.Mark().column + 1) + ")";
    }
    throw ValidationError("config: '" + key_path + "' " + why + where, key_path);
  }

 private:
  [[nodiscard]] YAML::Node get(const std::string& k) const {
    const YAML::Node& n = node_;
    return n[k];
  }

  [[nodiscard]] std::string key(const std::string& name) const {
    return path_.empty() ? name : path_ + "." + name;
  }

  static double to_double(const YAML::Node& v, const std::string& key_path) {
    double out = 0.0;
    if (!v.IsScalar() || !YAML::convert<double>::decode(v, out) || !std::isfinite(out)) {
      fail(key_path, "must be a finite number", v);
    }
    return out;
  }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> used_;
};

/// Evenly spaced (linear or logarithmic) list, or an explicit one.
struct SweepSpec {
  std::vector<double> values;
};

struct TrapConfig {
  double gap = 0.82e-3;               // measured h_V [m]
  double vertical_frequency = 18.9;   // measured omega_V / 2 pi [Hz]
  double lateral_frequency = 6.0;     // measured omega_L / 2 pi [Hz]
};

struct FieldMapConfig {
  double r_max = 10e-3;
  double z_min = 0.1e-3;   // above the stack top
  double z_max = 5e-3;
  std::size_t nr = 21;
  std::size_t nz = 21;
};

struct LandscapeConfig {
  double offset_max = 1e-3;
  double gap_min = 0.6e-3;
  double gap_max = 1.1e-3;
  std::size_t n_offset = 9;
  std::size_t n_gap = 6;
};

struct EddyConfig {
  double resolution = 0.1e-3;
  double omega = 15.0;
  bool use_measured_gap = false;       // default: simulated h_V
  std::vector<double> offsets;         // [m]
  double fit_window_min = 0.05e-3;
  std::vector<double> convergence_resolutions{0.2e-3, 0.1e-3, 0.05e-3};
  double perturbation = 0.3;
  double skin_depth_omega = 624.0;     // [rad/s]
  SheetSolverSettings solver;
  EnergyQuadrature quadrature;
};

struct GasCurveConfig {
  std::vector<double> pressures;       // [Pa]
  double eddy_floor = 5.5e-5;          // [Hz]
  double swirl_omega = 2.0 * constants::pi;
  std::vector<double> linearity_omegas;  // [rad/s]
  SwirlGridSettings swirl;
  double ambient_density = 1.204;      // [kg/m^3], ambient air reference
};

struct SpindownConfig {
  double omega0 = 15.0;
  double duration = 7200.0;
  double sample_rate = 10.0;
  double marker_radius = 4e-3;
  double position_noise = 4e-5;        // [m] per coordinate
  double gamma = 5.5e-5;               // [Hz], used when the table is empty
  std::vector<std::pair<double, double>> gamma_table;
  double smoothing_sigma = 1.0;        // [s]
  std::optional<double> window_start;  // [s]
  std::optional<double> window_end;
};

struct TiltConfig {
  double center_x = -0.544 * constants::pi / 180.0;  // [rad]
  double center_y = -0.383 * constants::pi / 180.0;
  double half_width = 0.5 * constants::pi / 180.0;
  std::size_t points_per_axis = 9;
  double floor = 5.5e-5;               // [Hz]
  double log_noise = 0.0;              // relative, lognormal
  double c1 = 6.20e4;
  double c2 = 1.91;
};

struct ComposeConfig {
  double residual_offset = 18.2e-6;    // [m], eddy plateau is gamma_fit at this offset
};

struct ExperimentConfig {
  MagnetStack stack;
  DiskSpec disk;
  GasSpec gas;
  TrapConfig trap;
  FieldMapConfig field_map;
  LandscapeConfig landscape;
  EddyConfig eddy;
  GasCurveConfig gas_curve;
  SpindownConfig spindown;
  TiltConfig tilt;
  ComposeConfig compose;
  double temperature = 300.0;          // for thermal estimates [K]
  std::uint64_t seed = 1;
};

namespace detail {

inline std::vector<double> read_sweep(ConfigSection& parent, std::string_view name, const UnitSet& set,
                                      std::vector<double> fallback) {
  if (auto list = parent.quantity_list(name, set)) {
    if (list->empty()) parent.invalid(std::string(name), "must not be empty");
    return *list;
  }
  auto sec = parent.child(name);
  if (!sec) return fallback;
  const double start = sec->quantity("start", set);
  const double stop = sec->quantity("stop", set);
  const long long count = sec->integer("count");
  const std::string spacing = sec->text("spacing", std::string("log"));
  sec->finish();
  if (count < 2) sec->invalid("count", "must be at least 2");
  if (!(stop > start)) sec->invalid("stop", "must exceed start");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (long long i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(count - 1);
    if (spacing == "log") {
      if (!(start > 0.0)) sec->invalid("start", "must be positive for log spacing");
      out[static_cast<std::size_t>(i)] = std::exp(std::log(start) + t * (std::log(stop) - std::log(start)));
    } else if (spacing == "linear") {
      out[static_cast<std::size_t>(i)] = start + t * (stop - start);
    } else {
      sec->invalid("spacing", "must be 'log' or 'linear'");
    }
  }
  out.front() = start;
  out.back() = stop;
  return out;
}

inline void require_positive(ConfigSection& s, std::string_view name, double v) {
  if (!(v > 0.0)) s.invalid(std::string(name), "must be positive");
}

inline std::size_t read_count(ConfigSection& s, std::string_view name, std::size_t fallback, long long minimum) {
  const long long v = s.integer(name, static_cast<long long>(fallback));
  if (v < minimum) s.invalid(std::string(name), "must be at least " + std::to_string(minimum));
  return static_cast<std::size_t>(v);
}

inline MagnetStack read_stack(ConfigSection sec) {
  const double top = sec.quantity("top_z", units::length(), 0.0);
  const auto groups = sec.sequence("magnets");
  if (groups.empty()) sec.invalid("magnets", "must list at least one magnet group");
  std::vector<MagnetSpec> magnets;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    ConfigSection m(groups[g], sec.path() + ".magnets[" + std::to_string(g) + "]");
    MagnetSpec spec;
    const std::string shape = m.text("shape");
    if (shape == "cylinder") {
      spec.shape = MagnetShape::Cylinder;
    } else if (shape == "ring") {
      spec.shape = MagnetShape::Ring;
    } else {
      m.invalid("shape", "must be 'cylinder' or 'ring'");
    }
    spec.outer_radius = m.quantity("outer_radius", units::length());
    spec.inner_radius = m.quantity("inner_radius", units::length(), 0.0);
    spec.height = m.quantity("height", units::length());
    spec.remanence = m.quantity("remanence", units::flux_density());
    const long long polarity = m.integer("polarity", 1);
    const long long count = m.integer("count", 1);
    const double group_top = m.quantity("top_z", units::length(), top);
    m.finish();
    require_positive(m, "outer_radius", spec.outer_radius);
    require_positive(m, "height", spec.height);
    require_positive(m, "remanence", spec.remanence);
    if (spec.shape == MagnetShape::Ring) {
      if (!(spec.inner_radius > 0.0)) m.invalid("inner_radius", "must be positive for a ring");
      if (!(spec.inner_radius < spec.outer_radius)) m.invalid("inner_radius", "must be smaller than outer_radius");
    } else if (spec.inner_radius != 0.0) {
      m.invalid("inner_radius", "is only valid for rings");
    }
    if (polarity != 1 && polarity != -1) m.invalid("polarity", "must be +1 or -1");
    if (count < 1) m.invalid("count", "must be at least 1");
    spec.polarity = static_cast<int>(polarity);
    for (long long i = 0; i < count; ++i) {
      MagnetSpec piece = spec;
      piece.base_z = group_top - static_cast<double>(count - i) * spec.height;
      magnets.push_back(piece);
    }
  }
  sec.finish();
  try {
    return MagnetStack(std::move(magnets));
  } catch (const DomainError& e) {
    throw ValidationError(std::string("config: '") + sec.path() + "' " + e.what(), sec.path());
  }
}

inline DiskSpec read_disk(ConfigSection sec) {
  DiskSpec d;
  d.radius = sec.quantity("radius", units::length());
  d.thickness = sec.quantity("thickness", units::length());
  d.mass = sec.quantity("mass", units::mass());
  d.chi_parallel = sec.number("chi_parallel");
  d.chi_perp = sec.number("chi_perp");
  d.sigma_parallel = sec.quantity("sigma_parallel", units::conductivity());
  d.sigma_perp = sec.quantity("sigma_perp", units::conductivity());
  sec.finish();
  require_positive(sec, "radius", d.radius);
  require_positive(sec, "thickness", d.thickness);
  require_positive(sec, "mass", d.mass);
  require_positive(sec, "chi_parallel", d.chi_parallel);
  require_positive(sec, "chi_perp", d.chi_perp);
  require_positive(sec, "sigma_parallel", d.sigma_parallel);
  require_positive(sec, "sigma_perp", d.sigma_perp);
  if (!(d.thickness < d.radius)) sec.invalid("thickness", "must be smaller than radius");
  return d;
}

inline GasSpec read_gas(ConfigSection sec) {
  GasSpec g;
  g.pressure = sec.quantity("pressure", units::pressure(), g.pressure);
  g.temperature = sec.quantity("temperature", units::temperature(), g.temperature);
  g.molecule_mass = sec.quantity("molecule_mass", units::molecular_mass(), g.molecule_mass);
  g.molecule_diameter = sec.quantity("molecule_diameter", units::length(), g.molecule_diameter);
  g.viscosity = sec.quantity("viscosity", units::viscosity(), g.viscosity);
  g.accommodation = sec.number("accommodation", g.accommodation);
  sec.finish();
  require_positive(sec, "pressure", g.pressure);
  require_positive(sec, "temperature", g.temperature);
  require_positive(sec, "molecule_mass", g.molecule_mass);
  require_positive(sec, "molecule_diameter", g.molecule_diameter);
  require_positive(sec, "viscosity", g.viscosity);
  if (!(g.accommodation > 0.0 && g.accommodation <= 1.0)) sec.invalid("accommodation", "must lie in (0, 1]");
  return g;
}

inline void read_eddy(ConfigSection sec, EddyConfig& e) {
  e.resolution = sec.quantity("mesh_resolution", units::length(), e.resolution);
  e.omega = sec.quantity("omega", units::angular_velocity(), e.omega);
  const std::string gap = sec.text("field_gap", std::string("simulated"));
  if (gap != "simulated" && gap != "measured") sec.invalid("field_gap", "must be 'simulated' or 'measured'");
  e.use_measured_gap = gap == "measured";
  e.offsets = read_sweep(sec, "offsets", units::length(), e.offsets);
  e.fit_window_min = sec.quantity("fit_window_min", units::length(), e.fit_window_min);
  if (auto r = sec.quantity_list("convergence_resolutions", units::length())) e.convergence_resolutions = *r;
  e.perturbation = sec.number("perturbation", e.perturbation);
  e.skin_depth_omega = sec.quantity("skin_depth_omega", units::angular_velocity(), e.skin_depth_omega);
  e.solver.tolerance = sec.number("solver_tolerance", e.solver.tolerance);
  e.solver.max_iterations = static_cast<int>(sec.integer("solver_max_iterations", e.solver.max_iterations));
  e.solver.direct_limit = read_count(sec, "direct_limit", e.solver.direct_limit, 0);
  e.quadrature.radial = read_count(sec, "quadrature_radial", e.quadrature.radial, 2);
  e.quadrature.axial = read_count(sec, "quadrature_axial", e.quadrature.axial, 2);
  e.quadrature.azimuthal = read_count(sec, "quadrature_azimuthal", e.quadrature.azimuthal, 2);
  sec.finish();
  require_positive(sec, "mesh_resolution", e.resolution);
  require_positive(sec, "omega", e.omega);
  require_positive(sec, "skin_depth_omega", e.skin_depth_omega);
  require_positive(sec, "solver_tolerance", e.solver.tolerance);
  if (e.solver.max_iterations < 1) sec.invalid("solver_max_iterations", "must be at least 1");
  for (double d : e.offsets) {
    if (!(d > 0.0)) sec.invalid("offsets", "must all be positive");
  }
  for (double r : e.convergence_resolutions) {
    if (!(r > 0.0)) sec.invalid("convergence_resolutions", "must all be positive");
  }
  if (!(e.perturbation > 0.0 && e.perturbation < 0.5)) sec.invalid("perturbation", "must lie in (0, 0.5)");
}

inline void read_gas_curve(ConfigSection sec, GasCurveConfig& g) {
  g.pressures = read_sweep(sec, "pressures", units::pressure(), g.pressures);
  g.eddy_floor = sec.quantity("eddy_floor", units::frequency(), g.eddy_floor);
  g.swirl_omega = sec.quantity("swirl_omega", units::angular_velocity(), g.swirl_omega);
  g.linearity_omegas = read_sweep(sec, "linearity_omegas", units::angular_velocity(), g.linearity_omegas);
  g.swirl.gap_cells = sec.number("swirl_gap_cells", g.swirl.gap_cells);
  g.swirl.growth = sec.number("swirl_growth", g.swirl.growth);
  g.swirl.max_spacing = sec.quantity("swirl_max_spacing", units::length(), g.swirl.max_spacing);
  g.swirl.domain_factor = sec.number("swirl_domain_factor", g.swirl.domain_factor);
  g.swirl.refinement = sec.number("swirl_refinement", g.swirl.refinement);
  g.ambient_density = sec.quantity("ambient_density", units::density(), g.ambient_density);
  sec.finish();
  for (double p : g.pressures) {
    if (!(p > 0.0)) sec.invalid("pressures", "must all be positive");
  }
  if (!(g.eddy_floor >= 0.0)) sec.invalid("eddy_floor", "must be non-negative");
  require_positive(sec, "swirl_omega", g.swirl_omega);
  if (g.swirl.gap_cells < 12.0) sec.invalid("swirl_gap_cells", "must be at least 12");
  if (!(g.swirl.growth >= 0.0)) sec.invalid("swirl_growth", "must be non-negative");
  require_positive(sec, "swirl_max_spacing", g.swirl.max_spacing);
  if (g.swirl.domain_factor < 5.0) sec.invalid("swirl_domain_factor", "must be at least 5");
  require_positive(sec, "swirl_refinement", g.swirl.refinement);
  require_positive(sec, "ambient_density", g.ambient_density);
}

inline void read_spindown(ConfigSection sec, SpindownConfig& s) {
  s.omega0 = sec.quantity("omega0", units::angular_velocity(), s.omega0);
  s.duration = sec.quantity("duration", units::time(), s.duration);
  s.sample_rate = sec.quantity("sample_rate", units::frequency(), s.sample_rate);
  s.marker_radius = sec.quantity("marker_radius", units::length(), s.marker_radius);
  s.position_noise = sec.quantity("position_noise", units::length(), s.position_noise);
  s.gamma = sec.quantity("gamma", units::frequency(), s.gamma);
  for (const auto& row : sec.sequence("gamma_table")) {
    ConfigSection r(row, sec.path() + ".gamma_table[" + std::to_string(s.gamma_table.size()) + "]");
    const double w = r.quantity("omega", units::angular_velocity());
    const double g = r.quantity("gamma", units::frequency());
    r.finish();
    s.gamma_table.emplace_back(w, g);
  }
  s.smoothing_sigma = sec.quantity("smoothing_sigma", units::time(), s.smoothing_sigma);
  if (sec.has_quantity("window_start", units::time())) {
    s.window_start = sec.quantity("window_start", units::time());
  }
  if (sec.has_quantity("window_end", units::time())) {
    s.window_end = sec.quantity("window_end", units::time());
  }
  sec.finish();
  require_positive(sec, "omega0", s.omega0);
  require_positive(sec, "duration", s.duration);
  require_positive(sec, "sample_rate", s.sample_rate);
  require_positive(sec, "marker_radius", s.marker_radius);
  require_positive(sec, "smoothing_sigma", s.smoothing_sigma);
  if (!(s.position_noise >= 0.0)) sec.invalid("position_noise", "must be non-negative");
  if (!(s.gamma >= 0.0)) sec.invalid("gamma", "must be non-negative");
  if (s.window_start && s.window_end && !(*s.window_end > *s.window_start)) {
    sec.invalid("window_end", "must exceed window_start");
  }
}

inline void read_tilt(ConfigSection sec, TiltConfig& t) {
  t.center_x = sec.quantity("center_x", units::angle(), t.center_x);
  t.center_y = sec.quantity("center_y", units::angle(), t.center_y);
  t.half_width = sec.quantity("half_width", units::angle(), t.half_width);
  t.points_per_axis = read_count(sec, "points_per_axis", t.points_per_axis, 3);
  t.floor = sec.quantity("floor", units::frequency(), t.floor);
  t.log_noise = sec.number("log_noise", t.log_noise);
  t.c1 = sec.number("c1", t.c1);
  t.c2 = sec.number("c2", t.c2);
  sec.finish();
  require_positive(sec, "half_width", t.half_width);
  require_positive(sec, "floor", t.floor);
  require_positive(sec, "c1", t.c1);
  require_positive(sec, "c2", t.c2);
  if (!(t.log_noise >= 0.0)) sec.invalid("log_noise", "must be non-negative");
}

inline std::vector<double> default_offsets() {
  std::vector<double> d(12);
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] = 0.05e-3 * std::pow(20.0, static_cast<double>(i) / 11.0);
  }
  d.back() = 1.0e-3;
  return d;
}

inline std::vector<double> default_pressures() {
  std::vector<double> p(45);
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::pow(10.0, -6.0 + 11.0 * static_cast<double>(i) / 44.0);
  return p;
}

inline std::vector<double> default_linearity_omegas() {
  std::vector<double> w;
  for (double f : {0.1, 0.5, 1.0, 1.5, 2.0}) w.push_back(2.0 * constants::pi * f);
  return w;
}

}  // namespace detail

/// Parses and validates a configuration document.
inline ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ValidationError("config: parse error at line " + std::to_string(e.mark.line + 1) + ", column " +
                          std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  if (!root || root.IsNull()) throw ValidationError("config: parse error at line 1, column 1: empty document");
  ConfigSection top(root, "");
  ExperimentConfig cfg;
  cfg.eddy.offsets = detail::default_offsets();
  cfg.gas_curve.pressures = detail::default_pressures();
  cfg.gas_curve.linearity_omegas = detail::default_linearity_omegas();
  const long long seed = top.integer("seed", 1);
  if (seed < 0) top.invalid("seed", "must be non-negative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.temperature = top.quantity("temperature", units::temperature(), cfg.temperature);
  cfg.stack = detail::read_stack(top.required_child("stack"));
  cfg.disk = detail::read_disk(top.required_child("disk"));
  if (auto s = top.child("gas")) cfg.gas = detail::read_gas(std::move(*s));
  if (auto s = top.child("trap")) {
    cfg.trap.gap = s->quantity("gap", units::length(), cfg.trap.gap);
    cfg.trap.vertical_frequency = s->quantity("vertical_frequency", units::frequency(), cfg.trap.vertical_frequency);
    cfg.trap.lateral_frequency = s->quantity("lateral_frequency", units::frequency(), cfg.trap.lateral_frequency);
    s->finish();
    detail::require_positive(*s, "gap", cfg.trap.gap);
    detail::require_positive(*s, "vertical_frequency", cfg.trap.vertical_frequency);
    detail::require_positive(*s, "lateral_frequency", cfg.trap.lateral_frequency);
  }
  if (auto s = top.child("field_map")) {
    auto& f = cfg.field_map;
    f.r_max = s->quantity("r_max", units::length(), f.r_max);
    f.z_min = s->quantity("z_min", units::length(), f.z_min);
    f.z_max = s->quantity("z_max", units::length(), f.z_max);
    f.nr = detail::read_count(*s, "nr", f.nr, 2);
    f.nz = detail::read_count(*s, "nz", f.nz, 2);
    s->finish();
    detail::require_positive(*s, "r_max", f.r_max);
    if (!(f.z_max > f.z_min)) s->invalid("z_max", "must exceed z_min");
  }
  if (auto s = top.child("landscape")) {
    auto& l = cfg.landscape;
    l.offset_max = s->quantity("offset_max", units::length(), l.offset_max);
    l.gap_min = s->quantity("gap_min", units::length(), l.gap_min);
    l.gap_max = s->quantity("gap_max", units::length(), l.gap_max);
    l.n_offset = detail::read_count(*s, "n_offset", l.n_offset, 2);
    l.n_gap = detail::read_count(*s, "n_gap", l.n_gap, 2);
    s->finish();
    detail::require_positive(*s, "offset_max", l.offset_max);
    detail::require_positive(*s, "gap_min", l.gap_min);
    if (!(l.gap_max > l.gap_min)) s->invalid("gap_max", "must exceed gap_min");
  }
  if (auto s = top.child("eddy")) detail::read_eddy(std::move(*s), cfg.eddy);
  if (auto s = top.child("gas_curve")) detail::read_gas_curve(std::move(*s), cfg.gas_curve);
  if (auto s = top.child("spindown")) detail::read_spindown(std::move(*s), cfg.spindown);
  if (auto s = top.child("tilt")) detail::read_tilt(std::move(*s), cfg.tilt);
  if (auto s = top.child("compose")) {
    cfg.compose.residual_offset = s->quantity("residual_offset", units::length(), cfg.compose.residual_offset);
    s->finish();
    detail::require_positive(*s, "residual_offset", cfg.compose.residual_offset);
  }
  top.finish();
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace levrotor
