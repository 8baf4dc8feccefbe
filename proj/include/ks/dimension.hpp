#pragma once

#include <cmath>

#include "ks/errors.hpp"

namespace ks {

// Space dimension d of the chemotaxis system, restricted to 3..9 where the
// indicial polynomial x^2 + (d+2)x + 4(d-1) has complex roots and the
// log-periodic tail oscillation exists.
struct Dimension {
  int d;

  explicit Dimension(int dim) : d(dim) {
    if (d < 3 || d > 9) throw ParameterError("dimension must be in [3,9]");
  }

  // Oscillation frequency omega_d = sqrt((d-2)(10-d))/2 (= sqrt(7)/2 for d=3).
  double omega() const { return 0.5 * std::sqrt(double((d - 2) * (10 - d))); }

  // Decay exponent of the oscillatory tails: Re of the indicial root, (d+2)/2.
  double sigma() const { return 0.5 * (d + 2); }

  // Central value of the reduced-mass steady state, Qbar(0) = 1/(2d).
  double qbar0() const { return 1.0 / (2.0 * d); }

  // log-lambda spacing of successive mismatch roots, pi/omega_d.
  double root_spacing() const { return M_PI / omega(); }
};

}  // namespace ks
