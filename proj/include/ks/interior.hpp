#pragma once

#include "ks/dimension.hpp"
#include "ks/linear_ops.hpp"
#include "ks/radial.hpp"
#include "ks/steady.hpp"

namespace ks {

struct InteriorSolution {
  double a = 0;       // central value Phi(0)
  double lambda = 0;  // 1/sqrt(2 d a), leading-order scale
  double r0 = 0;
  double r_start = 0;  // series start radius
  RadialProfile profile;  // on [r_start, r0], analytic second derivatives
  double phi_r0 = 0;
  double dphi_r0 = 0;
};

// Forward shoot from r_min = 1e-6 min(1, 1/sqrt(a)) with series data
// Phi = a + b r^2, b = a(1 - 2da)/(2(d+2)).
InteriorSolution shoot_interior(double a, double r0, Dimension dim, double tol = 1e-13,
                                int n_per_decade = 300);

void shoot_interior_boundary(double a, double r0, Dimension dim, double tol, double& phi_r0,
                             double& dphi_r0);

// Q1(z) = (lambda^2 Phi(lambda z) - Qbar(z)) / lambda^4 on [z_min, r0/lambda],
// z_min = 10 r_start / lambda. `reliable` is false when lambda^4 < 1e-14
// (cancellation dominates the extraction).
struct Q1Extract {
  RadialProfile q1;
  double y_norm = 0;
  double r1 = 0;
  bool reliable = true;
};

Q1Extract extract_Q1(const InteriorSolution& sol, const SteadyPair& steady);

// Fixed-point route: Q1 <- S(J[Qbar,lambda] Q1),
// J = -LambdaQbar/(2 lambda^2) - (lambda^2/2) Lambda Q1 + lambda^4 (2d Q1^2 + z (Q1^2)').
struct PicardInterior {
  RadialProfile q1;
  double y_norm = 0;
  std::vector<double> increment_norms;
  int iterations = 0;
  bool converged = false;
};

PicardInterior picard_interior(double lambda, double r0, Dimension dim,
                               const SteadyPair& steady, const SResolvent& S,
                               double increment_tol = 1e-9, int max_iter = 50);

}  // namespace ks
