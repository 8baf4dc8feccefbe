#pragma once

#include "ks/dimension.hpp"
#include "ks/ivp.hpp"
#include "ks/radial.hpp"

namespace ks {

// Steady state of the chemotaxis system in reduced-mass form.
//   Qbar'' + (d+1)/r Qbar' + 2d Qbar^2 + r (Qbar^2)' = 0,  Qbar(0) = 1/(2d)
// together with Q = 2d Qbar + 2r Qbar' (Q(0) = 1) and the integral
// intW(r) = \int_0^r 2 s Qbar(s) ds used by the H-operator Wronskian weight
// exp(intW). All three carry analytic second derivatives.
struct SteadyPair {
  Dimension dim;
  RadialProfile Qbar;
  RadialProfile Q;
  RadialProfile intW;

  double weight_exp(double r) const;  // exp(intW(r))
};

// Integrates from r_min = 1e-6 with series data Qbar = a + b r^2,
// a = 1/(2d), b = -d a^2/(d+2). Requires r_max >= 30, tol <= 1e-9.
SteadyPair solve_steady(Dimension dim, double r_max = 30.0, double tol = 1e-12);

// Independent cross-check: solves the density equation
//   Q'' + (d-1)/r Q' + Q^2 + Q' m/r^{d-1} = 0,  m' = Q r^{d-1}
// directly (nonlocal term as an extra state). Test oracle for solve_steady.
RadialProfile solve_steady_direct(Dimension dim, double r_max = 30.0, double tol = 1e-12);

// Reduced mass Phi(r) = (1/2r^d) \int_0^r U(s) s^{d-1} ds, on U's grid.
// Derivative and second derivative filled from the transform identities.
RadialProfile mass_transform(const RadialProfile& U, Dimension dim);

// Pointwise inverse U = 2d Phi + 2r Phi'.
RadialProfile mass_transform_inverse(const RadialProfile& Phi, Dimension dim);

// Residual of the Qbar equation on an arbitrary profile (scaling-covariance
// and equation checks).
double qbar_equation_residual_sup(const RadialProfile& p, Dimension dim, double r_lo,
                                  double r_hi);

}  // namespace ks
