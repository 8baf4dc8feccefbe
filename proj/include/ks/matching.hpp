#pragma once

#include <optional>
#include <vector>

#include "ks/dimension.hpp"
#include "ks/exterior.hpp"
#include "ks/interior.hpp"
#include "ks/linear_ops.hpp"
#include "ks/oscillation.hpp"
#include "ks/steady.hpp"

namespace ks {

// One matched parameter point: eps solved so the values agree at r0; the
// derivative mismatch F(lambda) = Phi_ext'(r0) - Phi_int'(r0) remains.
struct MatchPoint {
  double a = 0;
  double lambda = 0;
  double epsilon = 0;
  double value_gap = 0;       // |Phi_ext(r0) - Phi_int(r0)| after the eps-solve
  double deriv_mismatch = 0;  // script-F
  double phi_r0 = 0;
  double dphi_int = 0;
  double dphi_ext = 0;
};

struct MatchScan {
  std::vector<MatchPoint> points;                // increasing a, decreasing lambda
  std::vector<std::pair<int, int>> brackets;     // index pairs with sign change
  double predicted_period = 0;                   // pi/omega_d in log-lambda
  double pred_amp = 0, pred_phase = 0;           // mismatch envelope model
};

// Precomputed ingredients shared by all matching operations at fixed (d, r0).
struct MatchingContext {
  Dimension dim;
  double r0;
  double R;        // exterior seed radius
  double tol_ode;  // shooting tolerance
  SteadyPair steady;
  FundamentalSolution u1;
  OscillationFit u1_origin_fit;   // c1 sin(omega log r + c2) r^{-(d+2)/2}
  OscillationFit qbar_tail_fit;   // Qbar - Phi_*: c sin(omega log r + phi) r^{-(d+2)/2}
  double u1_at_r0;

  // Envelope model of the mismatch:
  //   F(lambda) ~ lambda^{(d-2)/2} amp sin(-omega log lambda + phase).
  double predictor(double lambda) const;
  double predictor_envelope(double lambda) const;
};

MatchingContext make_matching_context(Dimension dim, double r0, double r_max_steady = 30.0,
                                      double R = 30.0, double tol_ode = 1e-13);

// 1-D secant solve of Phi_ext[eps](r0) = Phi_int[a](r0), started from the
// leading-order predictor eps0 = (Phi_int(r0) - Phi_*(r0)) / u1(r0).
MatchPoint solve_eps(const MatchingContext& ctx, double a);

// Samples the mismatch on a log-uniform a-grid and detects sign changes.
MatchScan scan_mismatch(const MatchingContext& ctx, double a_lo, double a_hi, int n_samples);

struct RefinedRoot {
  double mu = 0;
  double a = 0;
  double eps = 0;
  MatchPoint point;
};

// Bisection in log a inside a sign-change bracket; stops when
// |F| < tol * envelope and the bracket is 1e-12 relatively thin.
RefinedRoot refine_mu(const MatchingContext& ctx, const MatchPoint& left,
                      const MatchPoint& right, double tol = 1e-8);

struct ProfileReport {
  double value_gap_rel = 0;        // C1 value gap at r0, relative
  double deriv_gap_rel = 0;        // C1 derivative gap at r0, relative
  double nonlocal_residual = 0;    // scaled sup of the nonlocal equation residual
  double interior_metric = 0;      // sup_{r<=r0} |U_n - mu^-2 Q(r/mu)|
  double exterior_metric = 0;      // sup_{r>=r0} (1+r^2) |U_n - 2(d-2)/r^2|
  double sup_U = 0;
};

// The assembled self-similar profile U_n (and its reduced mass Phi_n).
struct SelfSimilarProfile {
  int n = 0;
  Dimension dim;
  double mu_n = 0;
  double eps_n = 0;
  double r0 = 0;
  RadialProfile Phi;  // stitched, [r_start, R]
  RadialProfile U;    // 2d Phi + 2r Phi'
  ProfileReport report;
};

SelfSimilarProfile assemble_profile(const MatchingContext& ctx, int n, const RefinedRoot& root);

// End-to-end: scan, refine the first n_profiles roots, assemble.
std::vector<SelfSimilarProfile> build_profiles(const MatchingContext& ctx, int n_profiles,
                                               double scan_periods = 0, int per_period = 40);

// Residual oracle on the four explicit solutions (and their reduced masses).
struct ExplicitReport {
  double u0_res = 0, u1_res = 0, u2_res = 0, u3_res = 0;  // nonlocal U-equation
  double p0_res = 0, p1_res = 0, p2_res = 0, p3_res = 0;  // local Phi-equation
  double max_residual() const;
};

ExplicitReport verify_explicit(Dimension dim);

// Scaled residual of the radial nonlocal self-similar equation on U, with the
// mass integral computed honestly by quadrature of U itself.
double nonlocal_residual_sup(const RadialProfile& U, Dimension dim, double r_lo, double r_hi);

}  // namespace ks
