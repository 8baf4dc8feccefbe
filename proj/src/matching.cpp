#include "ks/matching.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

#include "ks/parallel.hpp"
#include "ks/quadrature.hpp"

namespace ks {

double MatchingContext::predictor(double lambda) const {
  const double om = dim.omega();
  return predictor_envelope(lambda) *
         std::sin(-om * std::log(lambda) + qbar_tail_fit.phase - u1_origin_fit.phase);
}

double MatchingContext::predictor_envelope(double lambda) const {
  const double om = dim.omega();
  const double amp = u1_origin_fit.amplitude * qbar_tail_fit.amplitude * om /
                     (std::abs(u1_at_r0) * std::pow(r0, dim.d + 3));
  return std::pow(lambda, 0.5 * (dim.d - 2)) * amp;
}

MatchingContext make_matching_context(Dimension dim, double r0, double r_max_steady, double R,
                                      double tol_ode) {
  if (!(0 < r0 && r0 < 1)) throw ParameterError("matching: need 0 < r0 < 1");
  SteadyPair steady = solve_steady(dim, std::max(30.0, r_max_steady));
  FundamentalSolution u1 = fundamental_u1(dim, 1e-6, std::max(R, 30.0) + 10.0);
  const double om = dim.omega();
  // u1 near the origin: c1 sin(omega log r + c2) / r^{(d+2)/2}
  OscillationFit u1_fit =
      fit_oscillation(u1.profile, nullptr, dim.sigma(), 1e-6, 0.05, 0.8 * om, 1.2 * om,
                      /*strict=*/false);
  // Qbar tail: c sin(omega log r + phi) / r^{(d+2)/2} around Phi_* = 1/r^2,
  // fitted far out (log-r window) where the O(r^-3) remainder cannot bias
  // the frequency or the phase.
  const SteadyPair far = solve_steady(dim, 8e10);
  OscillationFit qbar_fit = fit_oscillation(
      far.Qbar, [](double r) { return 1.0 / (r * r); }, dim.sigma(), std::exp(5.0),
      std::exp(25.0), 0.8 * om, 1.2 * om, /*strict=*/false, 1200);
  const double u1_r0 = u1.profile.value(r0);
  return MatchingContext{dim,    r0,     R,     tol_ode, std::move(steady),
                         std::move(u1), u1_fit, qbar_fit, u1_r0};
}

MatchPoint solve_eps(const MatchingContext& ctx, double a) {
  MatchPoint pt;
  pt.a = a;
  pt.lambda = 1.0 / std::sqrt(2.0 * ctx.dim.d * a);

  double v_int, d_int;
  shoot_interior_boundary(a, ctx.r0, ctx.dim, ctx.tol_ode, v_int, d_int);
  pt.dphi_int = d_int;

  const double phi_star = 1.0 / (ctx.r0 * ctx.r0);
  const double f_tol = 1e-12 * phi_star;
  double eps = (v_int - phi_star) / ctx.u1_at_r0;

  double v_ext, d_ext;
  shoot_exterior_boundary(eps, ctx.r0, ctx.dim, ctx.R, ctx.tol_ode, v_ext, d_ext);
  double f = v_ext - v_int;
  // One Newton step with the known leading slope, then secant.
  double eps_prev = eps, f_prev = f;
  eps = eps - f / ctx.u1_at_r0;
  for (int it = 0; it < 60; ++it) {
    shoot_exterior_boundary(eps, ctx.r0, ctx.dim, ctx.R, ctx.tol_ode, v_ext, d_ext);
    f = v_ext - v_int;
    if (std::abs(f) < f_tol) break;
    const double denom = f - f_prev;
    double step;
    if (denom != 0 && eps != eps_prev)
      step = -f * (eps - eps_prev) / denom;
    else
      step = -f / ctx.u1_at_r0;
    eps_prev = eps;
    f_prev = f;
    eps += step;
    if (!std::isfinite(eps))
      throw ConvergenceError("solve_eps: secant diverged at a=" + std::to_string(a));
    if (it == 59)
      throw ConvergenceError("solve_eps: no convergence at a=" + std::to_string(a));
  }
  pt.epsilon = eps;
  pt.value_gap = std::abs(f);
  pt.phi_r0 = v_int;
  pt.dphi_ext = d_ext;
  pt.deriv_mismatch = d_ext - d_int;
  return pt;
}

MatchScan scan_mismatch(const MatchingContext& ctx, double a_lo, double a_hi, int n_samples) {
  if (!(0 < a_lo && a_lo < a_hi)) throw ParameterError("scan_mismatch: bad a range");
  const double om = ctx.dim.omega();
  if (std::log(a_hi / a_lo) < 4.0 * M_PI / om * (1 - 1e-9))
    throw ParameterError("scan_mismatch: a range must span >= 2 predicted periods");
  if (n_samples < 8) throw ParameterError("scan_mismatch: too few samples");

  MatchScan scan;
  scan.predicted_period = ctx.dim.root_spacing();
  scan.pred_amp = ctx.predictor_envelope(1.0);
  scan.pred_phase = ctx.qbar_tail_fit.phase - ctx.u1_origin_fit.phase;
  scan.points.resize(n_samples);
  parallel_for(n_samples, [&](std::size_t i) {
    const double a = a_lo * std::pow(a_hi / a_lo, double(i) / double(n_samples - 1));
    scan.points[i] = solve_eps(ctx, a);
  });
  for (int i = 0; i + 1 < n_samples; ++i) {
    const double f0 = scan.points[i].deriv_mismatch;
    const double f1 = scan.points[i + 1].deriv_mismatch;
    if (f0 * f1 < 0) scan.brackets.emplace_back(i, i + 1);
  }
  if (scan.brackets.empty()) {
    // Attach the predictor's expected root locations to the error.
    std::ostringstream os;
    os << "scan_mismatch: no sign change in [" << a_lo << ", " << a_hi << "]; predictor roots near lambda = ";
    const double phase = scan.pred_phase;
    const double l_hi = scan.points.front().lambda;
    for (int k = 0; k < 1000; ++k) {
      const double lam = std::exp((phase - (k + 1) * M_PI) / om);
      if (lam > l_hi) continue;
      if (lam < scan.points.back().lambda) break;
      os << lam << " ";
    }
    throw Error(os.str());
  }
  return scan;
}

RefinedRoot refine_mu(const MatchingContext& ctx, const MatchPoint& left,
                      const MatchPoint& right, double tol) {
  MatchPoint lo = left, hi = right;
  if (!(lo.deriv_mismatch * hi.deriv_mismatch < 0))
    throw ParameterError("refine_mu: not a sign-change bracket");
  MatchPoint best = std::abs(lo.deriv_mismatch) < std::abs(hi.deriv_mismatch) ? lo : hi;
  for (int it = 0; it < 80; ++it) {
    const double a_mid = std::sqrt(lo.a * hi.a);
    MatchPoint mid = solve_eps(ctx, a_mid);
    if (std::abs(mid.deriv_mismatch) < std::abs(best.deriv_mismatch)) best = mid;
    if (mid.deriv_mismatch * lo.deriv_mismatch > 0)
      lo = mid;
    else if (mid.deriv_mismatch * hi.deriv_mismatch > 0)
      hi = mid;
    else {
      best = mid;  // exact zero
      break;
    }
    const double width = (hi.a - lo.a) / a_mid;
    if (width < 1e-12 &&
        std::abs(best.deriv_mismatch) < tol * ctx.predictor_envelope(best.lambda))
      break;
    if (width < 1e-14) break;  // double-precision floor on the bracket
  }
  if (!(std::abs(best.deriv_mismatch) < tol * ctx.predictor_envelope(best.lambda)))
    throw ConvergenceError(
        "refine_mu: residual mismatch " + std::to_string(best.deriv_mismatch) +
        " above tol*envelope at lambda=" + std::to_string(best.lambda));
  RefinedRoot root;
  root.a = best.a;
  root.mu = best.lambda;
  root.eps = best.epsilon;
  root.point = best;
  return root;
}

double nonlocal_residual_sup(const RadialProfile& U, Dimension dim, double r_lo, double r_hi) {
  const int d = dim.d;
  const RadialProfile m = cumulative_integral(U, d - 1);
  double sup = 0;
  for (std::size_t i = 0; i < U.grid.size(); ++i) {
    const double r = U.grid.nodes[i];
    if (r < r_lo || r > r_hi) continue;
    const double u = U.values[i], du = U.derivs[i], d2u = U.second_deriv(r);
    const double nl = m.values[i] / std::pow(r, d - 1);
    const double terms[6] = {d2u,  (d - 1) / r * du, -0.5 * r * du,
                             -u,   u * u,            nl * du};
    double res = 0, scale = 1e-300;
    for (double t : terms) {
      res += t;
      scale += std::abs(t);
    }
    sup = std::max(sup, std::abs(res) / scale);
  }
  return sup;
}

SelfSimilarProfile assemble_profile(const MatchingContext& ctx, int n, const RefinedRoot& root) {
  const int d = ctx.dim.d;
  const InteriorSolution in_sol = shoot_interior(root.a, ctx.r0, ctx.dim, ctx.tol_ode, 400);
  const ExteriorSolution ex_sol =
      shoot_exterior(root.eps, ctx.r0, ctx.dim, ctx.R, ctx.tol_ode, 400, 200);

  SelfSimilarProfile prof{n, ctx.dim, root.mu, root.eps, ctx.r0, {}, {}, {}};

  // C1 gaps at the interface, relative to the local solution scale.
  prof.report.value_gap_rel =
      std::abs(in_sol.phi_r0 - ex_sol.phi_r0) / std::abs(in_sol.phi_r0);
  prof.report.deriv_gap_rel =
      std::abs(in_sol.dphi_r0 - ex_sol.dphi_r0) / std::abs(in_sol.dphi_r0);
  if (prof.report.value_gap_rel > 1e-8 || prof.report.deriv_gap_rel > 1e-8)
    throw Error("assemble_profile: C1 gap at r0 above 1e-8 relative");

  // Stitch [r_start, r0] + (r0, R].
  RadialGrid grid;
  grid.nodes = in_sol.profile.grid.nodes;
  std::vector<double> v = in_sol.profile.values, dv = in_sol.profile.derivs,
                      d2 = in_sol.profile.second;
  for (std::size_t i = 1; i < ex_sol.profile.grid.size(); ++i) {
    grid.nodes.push_back(ex_sol.profile.grid.nodes[i]);
    v.push_back(ex_sol.profile.values[i]);
    dv.push_back(ex_sol.profile.derivs[i]);
    d2.push_back(ex_sol.profile.second[i]);
  }
  grid.r_min = grid.nodes.front();
  grid.r_max = grid.nodes.back();
  grid.grading = Grading::custom;
  prof.Phi = RadialProfile(grid, std::move(v), std::move(dv), std::move(d2));

  // U = 2d Phi + 2r Phi' with analytic second derivative via Phi'''.
  const std::size_t m = grid.size();
  std::vector<double> uv(m), ud(m), u2(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double r = grid.nodes[i];
    const double p = prof.Phi.values[i], dp = prof.Phi.derivs[i], p2 = prof.Phi.second[i];
    const double p3 = phi_equation_third(ctx.dim, r, p, dp, p2);
    uv[i] = 2 * d * p + 2 * r * dp;
    ud[i] = (2 * d + 2) * dp + 2 * r * p2;
    u2[i] = (2 * d + 4) * p2 + 2 * r * p3;
  }
  prof.U = RadialProfile(grid, std::move(uv), std::move(ud), std::move(u2));

  prof.report.nonlocal_residual =
      nonlocal_residual_sup(prof.U, ctx.dim, grid.nodes.front(), grid.nodes.back());

  // Theorem metrics. The steady pair must reach r0/mu.
  const double z_max = ctx.r0 / root.mu;
  std::optional<SteadyPair> local;
  const SteadyPair* steady = &ctx.steady;
  if (ctx.steady.Q.grid.back() < z_max * 1.01) {
    local = solve_steady(ctx.dim, std::max(30.0, 1.05 * z_max));
    steady = &*local;
  }

  const double mu2 = root.mu * root.mu;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = grid.nodes[i];
    const double u = prof.U.values[i];
    prof.report.sup_U = std::max(prof.report.sup_U, u);
    if (r <= ctx.r0) {
      const double ref = steady->Q.value(r / root.mu) / mu2;
      prof.report.interior_metric =
          std::max(prof.report.interior_metric, std::abs(u - ref));
    }
    if (r >= ctx.r0) {
      const double ref = 2.0 * (d - 2) / (r * r);
      prof.report.exterior_metric =
          std::max(prof.report.exterior_metric, (1 + r * r) * std::abs(u - ref));
    }
  }
  return prof;
}

std::vector<SelfSimilarProfile> build_profiles(const MatchingContext& ctx, int n_profiles,
                                               double scan_periods, int per_period) {
  if (n_profiles < 1) throw ParameterError("build_profiles: n_profiles >= 1");
  const double om = ctx.dim.omega();
  // At least 2 periods (scan precondition), at least one per requested root.
  const double periods = std::max({scan_periods, double(n_profiles) + 1.5, 2.01});
  const double lam_hi = ctx.r0;
  const double a_lo = 1.0 / (2.0 * ctx.dim.d * lam_hi * lam_hi);
  const double a_hi = a_lo * std::exp(2.0 * periods * (M_PI / om));
  const int n_samples = std::max(64, int(per_period * periods));
  const MatchScan scan = scan_mismatch(ctx, a_lo, a_hi, n_samples);
  if (int(scan.brackets.size()) < n_profiles)
    throw Error("build_profiles: found only " + std::to_string(scan.brackets.size()) +
                " brackets, need " + std::to_string(n_profiles));
  std::vector<SelfSimilarProfile> out;
  for (int k = 0; k < n_profiles; ++k) {
    const auto [i, j] = scan.brackets[std::size_t(k)];
    const RefinedRoot root = refine_mu(ctx, scan.points[i], scan.points[j]);
    out.push_back(assemble_profile(ctx, k + 1, root));
  }
  return out;
}

// --- explicit-solution oracle --------------------------------------------------

namespace {

RadialGrid explicit_grid() {
  return make_graded_grid(1e-3, 30.0, 900, 500);
}

}  // namespace

double ExplicitReport::max_residual() const {
  double m = 0;
  for (double x : {u0_res, u1_res, u2_res, u3_res, p0_res, p1_res, p2_res, p3_res})
    m = std::max(m, x);
  return m;
}

ExplicitReport verify_explicit(Dimension dim) {
  const int d = dim.d;
  const RadialGrid g = explicit_grid();
  ExplicitReport rep;

  auto ubar0 = sample_profile(g, [](double) { return 0.0; }, [](double) { return 0.0; },
                              [](double) { return 0.0; });
  auto ubar1 = sample_profile(g, [](double) { return 1.0; }, [](double) { return 0.0; },
                              [](double) { return 0.0; });
  auto ubar2 = sample_profile(
      g, [d](double r) { return 2.0 * (d - 2) / (r * r); },
      [d](double r) { return -4.0 * (d - 2) / (r * r * r); },
      [d](double r) { return 12.0 * (d - 2) / (r * r * r * r); });
  auto D = [d](double r) { return 2.0 * (d - 2) + r * r; };
  auto ubar3 = sample_profile(
      g,
      [&](double r) { return 4.0 * (d - 2) * (2 * d + r * r) / (D(r) * D(r)); },
      [&](double r) {
        return -8.0 * (d - 2) * r * (r * r + 2 * d + 4) / (D(r) * D(r) * D(r));
      },
      [&](double r) {
        const double N = -8.0 * (d - 2) * (r * r * r + (2 * d + 4) * r);
        const double dN = -8.0 * (d - 2) * (3 * r * r + 2 * d + 4);
        return (dN * D(r) - 6 * N * r) / std::pow(D(r), 4);
      });

  rep.u0_res = nonlocal_residual_sup(ubar0, dim, 1e-3, 30.0);
  rep.u1_res = nonlocal_residual_sup(ubar1, dim, 1e-3, 30.0);
  rep.u2_res = nonlocal_residual_sup(ubar2, dim, 0.01, 30.0);
  rep.u3_res = nonlocal_residual_sup(ubar3, dim, 1e-3, 30.0);

  auto pbar0 = ubar0;
  auto pbar1 = sample_profile(g, [d](double) { return 1.0 / (2.0 * d); },
                              [](double) { return 0.0; }, [](double) { return 0.0; });
  auto pbar2 = sample_profile(
      g, [](double r) { return 1.0 / (r * r); }, [](double r) { return -2.0 / (r * r * r); },
      [](double r) { return 6.0 / (r * r * r * r); });
  auto pbar3 = sample_profile(
      g, [&](double r) { return 2.0 / D(r); }, [&](double r) { return -4.0 * r / (D(r) * D(r)); },
      [&](double r) { return -4.0 / (D(r) * D(r)) + 16.0 * r * r / (D(r) * D(r) * D(r)); });

  rep.p0_res = phi_residual_sup(pbar0, dim, 1e-3, 30.0);
  rep.p1_res = phi_residual_sup(pbar1, dim, 1e-3, 30.0);
  rep.p2_res = phi_residual_sup(pbar2, dim, 0.01, 30.0);
  rep.p3_res = phi_residual_sup(pbar3, dim, 1e-3, 30.0);
  return rep;
}

}  // namespace ks
