#pragma once

#include <functional>

#include "ks/radial.hpp"

namespace ks {

// Fit of r^p (profile - reference) to c sin(omega log r + phi) on [r_lo, r_hi].
struct OscillationFit {
  double amplitude = 0;     // c, nonzero on success
  double phase = 0;         // in [0, 2pi)
  double omega = 0;         // > 0
  double decay_p = 0;       // exponent used (or fitted, in free-p mode)
  double r_lo = 0, r_hi = 0;
  double rms_residual = 0;
  double periods = 0;       // omega (log r_hi - log r_lo) / 2pi
};

// Least-squares against {sin(omega log r), cos(omega log r)} with omega free
// inside [omega_lo, omega_hi] (golden-section refinement; the frequency is
// known analytically, only refinement is needed). `reference` may be null
// (zero reference). Throws DegenerateSignalError when the fitted amplitude is
// below 1e-12 and, when `strict`, FitError when the rms residual exceeds 5%
// of the amplitude.
OscillationFit fit_oscillation(const RadialProfile& profile,
                               const std::function<double(double)>& reference, double p,
                               double r_lo, double r_hi, double omega_lo, double omega_hi,
                               bool strict = true, int n_samples = 800);

// Diagnostic mode: the decay exponent is fitted too (outer golden-section on
// p, inner on omega).
OscillationFit fit_oscillation_free_p(const RadialProfile& profile,
                                      const std::function<double(double)>& reference,
                                      double p_lo, double p_hi, double r_lo, double r_hi,
                                      double omega_lo, double omega_hi, int n_samples = 800);

}  // namespace ks
