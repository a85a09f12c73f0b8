#pragma once

#include <cmath>

#include "levrotor/constants.hpp"
#include "levrotor/error.hpp"

namespace levrotor {

/// Bulirsch's generalized complete elliptic integral
///
///   cel(kc, p, c, s) = int_0^{pi/2} (c cos^2 t + s sin^2 t)
///                      / ((cos^2 t + p sin^2 t) sqrt(cos^2 t + kc^2 sin^2 t)) dt
///
/// evaluated by the Bartky/Bulirsch AGM-style iteration. Converges
/// quadratically; the tolerance is set for ~1e-14 relative accuracy.
/// K(k) = cel(k', 1, 1, 1), E(k) = cel(k', 1, 1, k'^2).
inline double cel(double kc, double p, double c, double s) {
  if (kc == 0.0) throw DomainError("cel: kc = 0 (logarithmic singularity)");
  constexpr double errtol = 1e-14;
  double k = std::abs(kc);
  double pp = p;
  double cc = c;
  double ss = s;
  double em = 1.0;
  if (p > 0.0) {
    pp = std::sqrt(p);
    ss = s / pp;
  } else {
    double f = kc * kc;
    double q = 1.0 - f;
    const double g = 1.0 - pp;
    f -= pp;
    q *= (ss - c * pp);
    pp = std::sqrt(f / g);
    cc = (c - ss) / g;
    ss = -q / (g * g * pp) + cc * pp;
  }
  double f = cc;
  cc += ss / pp;
  double g = k / pp;
  ss = 2.0 * (ss + f * g);
  pp += g;
  g = em;
  em += k;
  double kk = k;
  for (int iter = 0; iter < 64 && std::abs(g - k) > g * errtol; ++iter) {
    k = 2.0 * std::sqrt(kk);
    kk = k * em;
    f = cc;
    cc += ss / pp;
    g = kk / pp;
    ss = 2.0 * (ss + f * g);
    pp += g;
    g = em;
    em += k;
  }
  return 0.5 * constants::pi * (ss + cc * em) / (em * (em + pp));
}

/// Complete elliptic integral of the first kind, parameter m = k^2.
inline double ellint_K(double m) { return cel(std::sqrt(1.0 - m), 1.0, 1.0, 1.0); }

/// Complete elliptic integral of the second kind, parameter m = k^2.
inline double ellint_E(double m) { return cel(std::sqrt(1.0 - m), 1.0, 1.0, 1.0 - m); }

}  // namespace levrotor
