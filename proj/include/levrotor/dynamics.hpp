#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "levrotor/constants.hpp"
#include "levrotor/eddy.hpp"
#include "levrotor/error.hpp"
#include "levrotor/numerics.hpp"

namespace levrotor {

struct TraceSample {
  double t = 0.0;  // [s]
  double x = 0.0;  // [m]
  double y = 0.0;  // [m]
};

struct TraceMetadata {
  double pressure = std::numeric_limits<double>::quiet_NaN();  // [Pa]
  double tilt_x_deg = 0.0;
  double tilt_y_deg = 0.0;
  std::uint64_t seed = 0;
};

/// Tracked marker positions. `direction` is the known spin sense (+1, -1)
/// or 0 when it must be inferred.
struct SpinDownTrace {
  std::vector<TraceSample> samples;
  double marker_radius = 0.0;  // [m]
  int direction = 0;
  TraceMetadata meta;

  void validate(std::size_t min_samples = 2) const {
    if (samples.size() < min_samples) {
      throw DomainError("trace: need at least " + std::to_string(min_samples) + " samples, got " +
                        std::to_string(samples.size()));
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& s = samples[i];
      if (!std::isfinite(s.t) || !std::isfinite(s.x) || !std::isfinite(s.y)) {
        throw DomainError("trace: non-finite sample at index " + std::to_string(i));
      }
      if (i > 0 && !(s.t > samples[i - 1].t)) {
        throw DomainError("trace: time stamps must increase strictly (index " + std::to_string(i) + ")");
      }
    }
  }
};

/// Damping law for synthesis: a constant rate, or gamma(omega) tabulated on
/// increasing omega and interpolated linearly (clamped at the ends).
struct DampingModel {
  double gamma = 0.0;                          // [Hz], used when the table is empty
  std::vector<std::pair<double, double>> table;  // (omega [rad/s], gamma [Hz])

  [[nodiscard]] bool tabulated() const noexcept { return !table.empty(); }

  [[nodiscard]] double at(double omega) const {
    if (!tabulated()) return gamma;
    const double w = std::abs(omega);
    if (w <= table.front().first) return table.front().second;
    if (w >= table.back().first) return table.back().second;
    const auto it = std::upper_bound(table.begin(), table.end(), w,
                                     [](double v, const auto& p) { return v < p.first; });
    const auto& [w1, g1] = *it;
    const auto& [w0, g0] = *(it - 1);
    return g0 + (g1 - g0) * (w - w0) / (w1 - w0);
  }

  void validate() const {
    if (!tabulated()) {
      if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw DomainError("damping model: gamma must be >= 0");
      return;
    }
    for (std::size_t i = 0; i < table.size(); ++i) {
      if (!(table[i].second >= 0.0)) throw DomainError("damping model: tabulated gamma must be >= 0");
      if (i > 0 && !(table[i].first > table[i - 1].first)) {
        throw DomainError("damping model: table omegas must increase strictly");
      }
    }
  }
};

struct SpinDownSettings {
  double omega0 = 15.0;          // [rad/s]
  double duration = 100.0;       // [s]
  double sample_rate = 100.0;    // [Hz]
  double position_noise = 0.0;   // Gaussian sigma per coordinate [m]
  double marker_radius = 4.0e-3; // [m]
  double phase0 = 0.0;           // [rad]
  std::uint64_t seed = 1;
  int rk4_substeps = 4;          // per sample interval, tabulated models only
};

namespace detail {

/// Rotation angle for omega' = -gamma omega with constant gamma.
inline double exponential_phase(double omega0, double gamma, double t) {
  if (gamma == 0.0) return omega0 * t;
  return omega0 * (-std::expm1(-gamma * t)) / gamma;
}

}  // namespace detail

/// Noisy marker trace of a spinning-down rotor, deterministic under the seed.
inline SpinDownTrace simulate_spindown(const DampingModel& model, const SpinDownSettings& s) {
  model.validate();
  if (!(s.omega0 > 0.0)) throw DomainError("simulate_spindown: omega0 must be positive");
  if (!(s.duration > 0.0)) throw DomainError("simulate_spindown: duration must be positive");
  if (!(s.sample_rate > 0.0)) throw DomainError("simulate_spindown: sample rate must be positive");
  if (!(s.marker_radius > 0.0)) throw DomainError("simulate_spindown: marker radius must be positive");
  if (!(s.position_noise >= 0.0)) throw DomainError("simulate_spindown: noise must be non-negative");
  if (s.rk4_substeps < 1) throw DomainError("simulate_spindown: rk4_substeps must be positive");
  const auto n = static_cast<std::size_t>(std::floor(s.duration * s.sample_rate + 1e-9)) + 1;
  if (n < 100) throw DomainError("simulate_spindown: need sample_rate * duration >= 100");

  std::vector<double> phase(n);
  const double dt = 1.0 / s.sample_rate;
  if (!model.tabulated()) {
    for (std::size_t i = 0; i < n; ++i) {
      phase[i] = s.phase0 + detail::exponential_phase(s.omega0, model.gamma, static_cast<double>(i) * dt);
    }
  } else {
    using State = std::array<double, 2>;  // (phi, omega)
    auto rhs = [&model](double, const State& y) -> State { return {y[1], -model.at(y[1]) * y[1]}; };
    State y{s.phase0, s.omega0};
    const double h = dt / s.rk4_substeps;
    phase[0] = y[0];
    for (std::size_t i = 1; i < n; ++i) {
      for (int k = 0; k < s.rk4_substeps; ++k) {
        y = rk4_step(rhs, (static_cast<double>(i - 1) + static_cast<double>(k) / s.rk4_substeps) * dt, y, h);
      }
      phase[i] = y[0];
    }
  }

  SpinDownTrace trace;
  trace.marker_radius = s.marker_radius;
  trace.direction = +1;
  trace.meta.seed = s.seed;
  trace.samples.resize(n);
  std::mt19937_64 rng(s.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double ex = s.position_noise > 0.0 ? s.position_noise * noise(rng) : 0.0;
    const double ey = s.position_noise > 0.0 ? s.position_noise * noise(rng) : 0.0;
    trace.samples[i] = {static_cast<double>(i) * dt, s.marker_radius * std::cos(phase[i]) + ex,
                        s.marker_radius * std::sin(phase[i]) + ey};
  }
  return trace;
}

struct PhaseSeries {
  std::vector<double> t;
  std::vector<double> phi;  // unwrapped [rad]
};

namespace detail {

/// Algebraic least-squares circle fit; falls back to the sample mean when the
/// samples do not constrain a circle.
inline std::pair<double, double> circle_center(const SpinDownTrace& trace) {
  const std::size_t n = trace.samples.size();
  double mx = 0.0;
  double my = 0.0;
  for (const auto& s : trace.samples) {
    mx += s.x;
    my += s.y;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
  Eigen::Vector3d atb = Eigen::Vector3d::Zero();
  for (const auto& s : trace.samples) {
    const double x = s.x - mx;
    const double y = s.y - my;
    const Eigen::Vector3d row(2.0 * x, 2.0 * y, 1.0);
    ata += row * row.transpose();
    atb += row * (x * x + y * y);
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(ata, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv(2) > 1e-10 * sv(0))) return {mx, my};
  const Eigen::Vector3d sol = svd.solve(atb);
  return {mx + sol(0), my + sol(1)};
}

}  // namespace detail

/// Polar angle of the marker about the fitted circle centre, unwrapped so that
/// consecutive samples differ by less than pi. With a known spin direction,
/// a step against it larger than pi/2 reveals aliasing and is rejected.
inline PhaseSeries extract_phase(const SpinDownTrace& trace) {
  trace.validate();
  const std::size_t n = trace.samples.size();
  const auto [cx, cy] = detail::circle_center(trace);
  PhaseSeries out;
  out.t.resize(n);
  out.phi.resize(n);
  constexpr double kAmbiguous = 0.999 * constants::pi;
  double prev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = trace.samples[i].x - cx;
    const double dy = trace.samples[i].y - cy;
    if (dx == 0.0 && dy == 0.0) {
      throw DomainError("extract_phase: sample " + std::to_string(i) + " lies at the origin");
    }
    const double raw = std::atan2(dy, dx);
    out.t[i] = trace.samples[i].t;
    if (i == 0) {
      out.phi[i] = raw;
    } else {
      double step = std::remainder(raw - prev, 2.0 * constants::pi);
      if (std::abs(step) >= kAmbiguous ||
          (trace.direction != 0 && step * trace.direction < -0.5 * constants::pi)) {
        throw DomainError("extract_phase: unwrap ambiguity at sample " + std::to_string(i) +
                          " (phase step " + std::to_string(step) + " rad); trace is undersampled");
      }
      out.phi[i] = out.phi[i - 1] + step;
    }
    prev = raw;
  }
  return out;
}

struct OmegaSeries {
  std::vector<double> t;
  std::vector<double> omega;  // [rad/s]
  std::vector<bool> interior;  // false within 4 sigma of either end
  double sigma_t = 0.0;
};

/// Gaussian-weighted moving average of phi (truncated at 4 sigma, weights
/// renormalized near the ends), then omega by central differences.
inline OmegaSeries smooth_and_differentiate(const PhaseSeries& phase, double sigma_t = 0.1) {
  const std::size_t n = phase.t.size();
  if (phase.phi.size() != n) throw DomainError("smooth_and_differentiate: size mismatch");
  if (!(sigma_t > 0.0)) throw DomainError("smooth_and_differentiate: sigma_t must be positive");
  if (n < 3) throw DomainError("smooth_and_differentiate: need at least 3 samples");
  const double span = phase.t.back() - phase.t.front();
  if (span < 8.0 * sigma_t) {
    throw DomainError("smooth_and_differentiate: trace shorter than 8 sigma_t");
  }
  const double mean_dt = span / static_cast<double>(n - 1);
  if (mean_dt > 0.1 * sigma_t * (1.0 + 1e-9)) {
    throw DomainError("smooth_and_differentiate: fewer than 10 samples per sigma_t");
  }
  const double reach = 4.0 * sigma_t * (1.0 + 1e-9);
  std::vector<double> smooth(n);
  std::size_t lo = 0;
  std::size_t hi = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ti = phase.t[i];
    while (phase.t[lo] < ti - reach) ++lo;
    while (hi + 1 < n && phase.t[hi + 1] <= ti + reach) ++hi;
    double wsum = 0.0;
    double acc = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) {
      const double u = (phase.t[j] - ti) / sigma_t;
      const double w = std::exp(-0.5 * u * u);
      wsum += w;
      acc += w * (phase.phi[j] - phase.phi[i]);
    }
    smooth[i] = phase.phi[i] + acc / wsum;
  }
  OmegaSeries out;
  out.sigma_t = sigma_t;
  out.t = phase.t;
  out.omega.resize(n);
  out.interior.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = (i == 0) ? 0 : i - 1;
    const std::size_t b = (i + 1 == n) ? n - 1 : i + 1;
    out.omega[i] = (smooth[b] - smooth[a]) / (phase.t[b] - phase.t[a]);
    out.interior[i] = i > 0 && i + 1 < n && phase.t[i] - phase.t.front() >= reach &&
                      phase.t.back() - phase.t[i] >= reach;
  }
  return out;
}

struct GammaEstimate {
  double gamma = 0.0;               // [Hz]
  double ln_omega_intercept = 0.0;  // ln(omega) at t = 0
  double stderr_gamma = 0.0;        // [Hz]
  double window_start = 0.0;        // [s]
  double window_end = 0.0;          // [s]
  double r_squared = 0.0;
  std::size_t points = 0;
  bool weighted = false;
};

struct GammaWindow {
  double start = -std::numeric_limits<double>::infinity();
  double end = std::numeric_limits<double>::infinity();
};

/// Least squares on (t, ln omega) over interior samples inside the window;
/// gamma = -slope. The weighted option uses weights omega^2, the inverse
/// variance of ln(omega) for additive noise on omega.
inline GammaEstimate estimate_gamma(const OmegaSeries& series, const GammaWindow& window = {},
                                    bool weighted = false) {
  std::vector<double> t;
  std::vector<double> y;
  std::vector<double> w;
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < series.t.size(); ++i) {
    if (!series.interior[i] || series.t[i] < window.start || series.t[i] > window.end) continue;
    if (!(series.omega[i] > 0.0)) {
      bad.push_back(i);
      continue;
    }
    t.push_back(series.t[i]);
    y.push_back(std::log(series.omega[i]));
    w.push_back(weighted ? series.omega[i] * series.omega[i] : 1.0);
  }
  if (!bad.empty()) {
    std::string list;
    for (std::size_t k = 0; k < std::min<std::size_t>(bad.size(), 20); ++k) {
      list += (k ? "," : "") + std::to_string(bad[k]);
    }
    if (bad.size() > 20) list += ",...";
    throw DomainError("estimate_gamma: non-positive omega at indices " + list);
  }
  if (t.size() < 3) throw DomainError("estimate_gamma: fewer than 3 interior samples in the window");
  GammaEstimate est;
  est.weighted = weighted;
  est.points = t.size();
  est.window_start = t.front();
  est.window_end = t.back();
  if (!weighted) {
    const LinearFit fit = fit_line(t, y);
    est.gamma = -fit.slope;
    est.ln_omega_intercept = fit.intercept;
    est.stderr_gamma = fit.slope_stderr;
    est.r_squared = fit.r_squared;
    return est;
  }
  double sw = 0.0;
  double mt = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    sw += w[i];
    mt += w[i] * t[i];
    my += w[i] * y[i];
  }
  mt /= sw;
  my /= sw;
  double stt = 0.0;
  double sty = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    stt += w[i] * (t[i] - mt) * (t[i] - mt);
    sty += w[i] * (t[i] - mt) * (y[i] - my);
    syy += w[i] * (y[i] - my) * (y[i] - my);
  }
  const double slope = sty / stt;
  double sse = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = y[i] - (my + slope * (t[i] - mt));
    sse += w[i] * r * r;
  }
  est.gamma = -slope;
  est.ln_omega_intercept = my - slope * mt;
  est.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  est.stderr_gamma = std::sqrt(sse / static_cast<double>(t.size() - 2) / stt);
  return est;
}

/// Full pipeline from a marker trace to a damping-rate estimate.
inline GammaEstimate recover_gamma(const SpinDownTrace& trace, double sigma_t = 0.1,
                                   const GammaWindow& window = {}) {
  return estimate_gamma(smooth_and_differentiate(extract_phase(trace), sigma_t), window);
}

struct TiltSample {
  double theta_x_deg = 0.0;
  double theta_y_deg = 0.0;
  double gamma = 0.0;  // [Hz]
};

struct CollapsedPoint {
  double delta_theta_deg = 0.0;
  double gamma = 0.0;  // [Hz]
  double model = 0.0;  // [Hz]
};

/// Radial fit gamma = floor + c1' (g dtheta / omega_L^2)^c2' about a fitted
/// centre, with the 2D scan collapsed onto dtheta.
struct TiltScanResult {
  double center_x_deg = 0.0;
  double center_y_deg = 0.0;
  double c1 = 0.0;     // [Hz m^-c2]
  double c2 = 0.0;
  double floor = 0.0;  // [Hz]
  std::vector<CollapsedPoint> profile;  // sorted by dtheta
  double rms_log_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct TiltFitSettings {
  double omega_L = 2.0 * constants::pi * 6.0;  // [rad/s]
  int max_iterations = 500;
  double tolerance = 1e-15;  // relative cost decrease
};

namespace detail {

inline double tilt_model(const std::array<double, 5>& p, double tx, double ty, double k,
                         std::array<double, 5>* grad) {
  const double ex = tx - p[0];
  const double ey = ty - p[1];
  const double dth = std::hypot(ex, ey);
  const double a = std::exp(p[2]);
  const double c = p[3];
  const double fl = std::exp(p[4]);
  const double d = k * dth;
  const double pw = (d > 0.0) ? std::pow(d, c) : 0.0;
  const double m = fl + a * pw;
  if (grad != nullptr) {
    auto& g = *grad;
    if (dth > 0.0) {
      const double dm_ddth = a * c * pw / dth;
      g[0] = -dm_ddth * ex / dth;
      g[1] = -dm_ddth * ey / dth;
      g[3] = a * pw * std::log(d);
    } else {
      g[0] = g[1] = g[3] = 0.0;
    }
    g[2] = a * pw;
    g[4] = fl;
  }
  return m;
}

}  // namespace detail

/// Levenberg-Marquardt on log residuals ln(model) - ln(gamma) over
/// (centre x, centre y, ln c1', c2', ln floor).
inline TiltScanResult tilt_scan_collapse(std::span<const TiltSample> samples,
                                         const TiltFitSettings& settings = {}) {
  if (samples.size() < 6) throw DomainError("tilt_scan_collapse: need at least 6 samples");
  if (!(settings.omega_L > 0.0)) throw DomainError("tilt_scan_collapse: omega_L must be positive");
  double mx = 0.0;
  double my = 0.0;
  for (const auto& s : samples) {
    if (!(s.gamma > 0.0)) throw DomainError("tilt_scan_collapse: damping rates must be positive");
    mx += s.theta_x_deg;
    my += s.theta_y_deg;
  }
  const double n = static_cast<double>(samples.size());
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (const auto& s : samples) {
    sxx += (s.theta_x_deg - mx) * (s.theta_x_deg - mx);
    syy += (s.theta_y_deg - my) * (s.theta_y_deg - my);
    sxy += (s.theta_x_deg - mx) * (s.theta_y_deg - my);
  }
  const double tr = sxx + syy;
  const double det = sxx * syy - sxy * sxy;
  const double lmin = 0.5 * tr - std::sqrt(std::max(0.25 * tr * tr - det, 0.0));
  if (!(tr > 0.0) || lmin <= 1e-10 * tr) {
    throw DomainError("tilt_scan_collapse: rank-deficient scan (samples are collinear)");
  }

  const double k = constants::g / (settings.omega_L * settings.omega_L) * constants::pi / 180.0;
  // Start at the lowest sample, floor below the minimum, quadratic law.
  const auto lowest = std::min_element(samples.begin(), samples.end(),
                                       [](const auto& a, const auto& b) { return a.gamma < b.gamma; });
  double gmax = 0.0;
  double dmax = 0.0;
  for (const auto& s : samples) {
    const double d = k * std::hypot(s.theta_x_deg - lowest->theta_x_deg, s.theta_y_deg - lowest->theta_y_deg);
    if (d > dmax) {
      dmax = d;
      gmax = s.gamma;
    }
  }
  std::array<double, 5> p{lowest->theta_x_deg, lowest->theta_y_deg,
                          std::log(std::max(gmax - 0.5 * lowest->gamma, lowest->gamma) / (dmax * dmax)),
                          2.0, std::log(0.5 * lowest->gamma)};

  auto residuals = [&](const std::array<double, 5>& q, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      std::array<double, 5> g{};
      const double m = detail::tilt_model(q, samples[i].theta_x_deg, samples[i].theta_y_deg, k,
                                          jac ? &g : nullptr);
      r[static_cast<Eigen::Index>(i)] = std::log(m) - std::log(samples[i].gamma);
      if (jac != nullptr) {
        for (int c = 0; c < 5; ++c) (*jac)(static_cast<Eigen::Index>(i), c) = g[c] / m;
      }
    }
  };

  const auto m = static_cast<Eigen::Index>(samples.size());
  Eigen::VectorXd r(m);
  Eigen::MatrixXd jac(m, 5);
  residuals(p, r, &jac);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  TiltScanResult out;
  for (int it = 0; it < settings.max_iterations; ++it) {
    out.iterations = it + 1;
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * r;
    bool accepted = false;
    for (int tries = 0; tries < 40 && !accepted; ++tries) {
      Eigen::MatrixXd a = jtj;
      for (int c = 0; c < 5; ++c) a(c, c) += lambda * std::max(jtj(c, c), 1e-300);
      const Eigen::VectorXd step = a.ldlt().solve(-jtr);
      std::array<double, 5> trial = p;
      for (int c = 0; c < 5; ++c) trial[c] += step[c];
      Eigen::VectorXd rt(m);
      residuals(trial, rt, nullptr);
      const double ct = rt.squaredNorm();
      if (std::isfinite(ct) && ct <= cost) {
        const double drop = cost - ct;
        p = trial;
        lambda = std::max(lambda * 0.3, 1e-12);
        accepted = true;
        const bool small = drop <= settings.tolerance * std::max(cost, 1e-300) || ct < 1e-28;
        cost = ct;
        residuals(p, r, &jac);
        if (small) out.converged = true;
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted || out.converged) {
      out.converged = true;
      break;
    }
  }
  if (!std::isfinite(cost)) throw SolverError("tilt_scan_collapse: fit diverged", cost);

  out.center_x_deg = p[0];
  out.center_y_deg = p[1];
  out.c1 = std::exp(p[2]);
  out.c2 = p[3];
  out.floor = std::exp(p[4]);
  out.rms_log_residual = std::sqrt(cost / n);
  out.profile.reserve(samples.size());
  for (const auto& s : samples) {
    const double dth = std::hypot(s.theta_x_deg - p[0], s.theta_y_deg - p[1]);
    out.profile.push_back({dth, s.gamma, detail::tilt_model(p, s.theta_x_deg, s.theta_y_deg, k, nullptr)});
  }
  std::stable_sort(out.profile.begin(), out.profile.end(),
                   [](const auto& a, const auto& b) { return a.delta_theta_deg < b.delta_theta_deg; });
  return out;
}

/// Equipartition amplitude sqrt(k_B T / (m omega_L^2)).
inline double thermal_rms_displacement(double temperature, double mass, double omega_L) {
  if (!(temperature > 0.0) || !(mass > 0.0) || !(omega_L > 0.0)) {
    throw DomainError("thermal_rms_displacement: arguments must be positive");
  }
  return std::sqrt(constants::k_B * temperature / (mass * omega_L * omega_L));
}

/// Damping rate the power law assigns to the thermal offset.
inline double thermal_damping_rate(double temperature, double mass, double omega_L, const PowerLawFit& fit) {
  return fit(thermal_rms_displacement(temperature, mass, omega_L));
}

/// E_{l+1} - E_l = hbar^2 (l + 1) / I for E_l = hbar^2 l (l + 1) / 2I.
inline double rotor_level_spacing(double moment_of_inertia, int l) {
  if (!(moment_of_inertia > 0.0)) throw DomainError("rotor_level_spacing: I must be positive");
  if (l < 0) throw DomainError("rotor_level_spacing: l must be non-negative");
  return constants::hbar * constants::hbar * static_cast<double>(l + 1) / moment_of_inertia;
}

/// Offset that the power law maps onto a given damping floor.
inline double residual_offset_from_floor(double gamma_floor, const PowerLawFit& fit) {
  if (!(gamma_floor > 0.0)) throw DomainError("residual_offset_from_floor: floor must be positive");
  if (!(fit.c1 > 0.0) || !(fit.c2 != 0.0)) throw DomainError("residual_offset_from_floor: invalid fit");
  return std::pow(gamma_floor / fit.c1, 1.0 / fit.c2);
}

}  // namespace levrotor
