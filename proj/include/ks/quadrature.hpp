#pragma once

#include "ks/radial.hpp"

namespace ks {

// Integral of the cubic Hermite interpolant of g over one segment:
// corrected trapezoid, exact for the interpolant (O(h^4) for smooth g).
inline double hermite_segment_integral(double a, double b, double ga, double gb,
                                       double dga, double dgb) {
  const double h = b - a;
  return 0.5 * h * (ga + gb) + h * h * (dga - dgb) / 12.0;
}

// F(r) = \int_0^r f(s) s^m ds on f's grid. The gap [0, r_min] is closed by a
// two-point power-law fit of f on the first nodes; a fitted local exponent
// q with q + m <= -1 (non-integrable) raises DomainError.
// The returned profile stores F and F' = f(r) r^m.
RadialProfile cumulative_integral(const RadialProfile& f, int m);

// Same, but only the [0, r_min] closure term.
double origin_closure(const RadialProfile& f, int m);

// Local power-law exponent of |g| at the last two grid nodes, for tail
// extrapolation of improper integrals. Falls back to `fallback` when the
// data do not support a fit (zeros or sign change).
double fitted_tail_exponent(double r1, double g1, double r2, double g2, double fallback);

}  // namespace ks
