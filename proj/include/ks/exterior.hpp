#pragma once

#include "ks/dimension.hpp"
#include "ks/linear_ops.hpp"
#include "ks/radial.hpp"

namespace ks {

// Radial reduced-mass equation (local form of the self-similar system):
//   Phi'' + (d+1)/r Phi' - Phi - r Phi'/2 + 2d Phi^2 + 2r Phi Phi' = 0.
double phi_equation_rhs(Dimension dim, double r, double phi, double dphi);
// d(Phi'')/dr along a solution, for analytic third derivatives.
double phi_equation_third(Dimension dim, double r, double phi, double dphi, double d2phi);
// Scaled pointwise residual of the equation on a profile (needs second data).
double phi_residual_sup(const RadialProfile& p, Dimension dim, double r_lo, double r_hi);

struct ExteriorSolution {
  double epsilon = 0;
  double r0 = 0;
  double R = 0;
  RadialProfile profile;  // on [r0, R], analytic second derivatives
  double phi_r0 = 0;      // boundary data at the matching radius
  double dphi_r0 = 0;
};

// Backward shoot of the nonlinear equation from R with seed
// Phi(R) = Phi_* + eps * u1-series (the e^{r^2/4} mode decays backward).
// `n_inner/n_outer` <= 0 skips profile sampling (boundary data only).
ExteriorSolution shoot_exterior(double epsilon, double r0, Dimension dim, double R = 30.0,
                                double tol = 1e-13, int n_per_decade_inner = 400,
                                int n_per_decade_outer = 200);

// Boundary data only; the workhorse of the matching loop.
void shoot_exterior_boundary(double epsilon, double r0, Dimension dim, double R, double tol,
                             double& phi_r0, double& dphi_r0);

struct PicardReport {
  std::vector<double> increment_norms;  // X_{r0}-norm of successive increments
  double w_norm = 0;                    // final ||w||_{X_{r0}}
  int iterations = 0;
  bool converged = false;
};

// Fixed-point route of the exterior construction: w = eps tau(G[u1] w),
// G[u1]w = r d_r (u1+w)^2 + 2d (u1+w)^2. Returns w and the assembled
// Phi_* + eps u1 + eps w on the quadrature grid.
struct PicardExterior {
  RadialProfile w;
  RadialProfile assembled;
  PicardReport report;
};

PicardExterior picard_exterior(double epsilon, double r0, Dimension dim,
                               const TauResolvent& tau, double R = 30.0,
                               double increment_tol = 1e-9, int max_iter = 50);

}  // namespace ks
