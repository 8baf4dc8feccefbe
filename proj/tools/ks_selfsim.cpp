// ks-selfsim: construct and exercise backward self-similar blow-up profiles
// for the radial parabolic-elliptic chemotaxis system in dimensions 3-9.

#include <cmath>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "ks/evolution.hpp"
#include "ks/io.hpp"
#include "ks/kummer.hpp"
#include "ks/matching.hpp"

using nlohmann::json;

namespace {

std::string out_path(const ks::RunConfig& cfg, const std::string& name) {
  if (cfg.out_dir == "-") return "-";
  return cfg.out_dir + "/" + name;
}

json fit_json(const ks::OscillationFit& f) {
  return json{{"amplitude", f.amplitude}, {"phase", f.phase},
              {"omega", f.omega},         {"decay_p", f.decay_p},
              {"r_lo", f.r_lo},           {"r_hi", f.r_hi},
              {"rms_residual", f.rms_residual}, {"periods", f.periods}};
}

json report_header(const ks::RunConfig& cfg) {
  return json{{"config", cfg.echo()}};
}

int cmd_steady(const ks::RunConfig& cfg) {
  const ks::Dimension dim(cfg.dim);
  const ks::SteadyPair steady = ks::solve_steady(dim, cfg.r_max);
  ks::write_text(out_path(cfg, "Qbar.csv"), ks::profile_csv(steady.Qbar));
  if (cfg.out_dir != "-") {
    ks::write_text(out_path(cfg, "Q.csv"), ks::profile_csv(steady.Q));
    const double om = dim.omega();
    auto phistar = [](double r) { return 1.0 / (r * r); };
    const auto qbar_fit = ks::fit_oscillation(steady.Qbar, phistar, dim.sigma(), 5.0, 25.0,
                                              0.8 * om, 1.2 * om, false);
    auto ustar = [&](double r) { return 2.0 * (dim.d - 2) / (r * r); };
    const auto q_fit = ks::fit_oscillation(steady.Q, ustar, dim.sigma(), 5.0, 25.0, 0.8 * om,
                                           1.2 * om, false);
    json rep = report_header(cfg);
    rep["qbar_at_rmin"] = steady.Qbar.values.front();
    rep["q_at_rmin"] = steady.Q.values.front();
    rep["qbar_tail_fit"] = fit_json(qbar_fit);
    rep["q_tail_fit"] = fit_json(q_fit);
    ks::write_text(out_path(cfg, "steady_report.json"), rep.dump(2) + "\n");
  }
  return 0;
}

int cmd_fundamental(const ks::RunConfig& cfg) {
  const ks::Dimension dim(cfg.dim);
  const ks::SteadyPair steady = ks::solve_steady(dim, cfg.r_max);
  const auto u1 = ks::fundamental_u1(dim, 1e-6, 40.0);
  const auto v2 = ks::fundamental_v2(dim, u1, 1e-3, 40.0);
  const auto p1 = ks::fundamental_phi(dim, true, 1e-4, 40.0);
  const auto p2 = ks::fundamental_phi(dim, false, 1e-4, 40.0);
  const auto lam = ks::fundamental_lambda_qbar(steady);
  const auto rho = ks::fundamental_rho(steady);
  const auto w_u = ks::wronskian_check(u1, v2, nullptr, 2.0, 20.0);
  const auto w_p = ks::wronskian_check(p1, p2, nullptr, 0.01, 20.0);
  const auto w_h = ks::wronskian_check(lam, rho, &steady, 0.01, 5.0);
  json rep = report_header(cfg);
  rep["wronskian_u1_u2"] = {{"constant", w_u.constant}, {"max_rel_dev", w_u.max_rel_dev}};
  rep["wronskian_phi"] = {{"constant", w_p.constant}, {"max_rel_dev", w_p.max_rel_dev}};
  rep["wronskian_H"] = {{"constant", w_h.constant}, {"max_rel_dev", w_h.max_rel_dev}};
  rep["omega_d"] = dim.omega();
  if (cfg.out_dir != "-") {
    ks::write_text(out_path(cfg, "u1.csv"), ks::profile_csv(u1.profile));
    ks::write_text(out_path(cfg, "v2.csv"), ks::profile_csv(v2.profile));
    ks::write_text(out_path(cfg, "phi1.csv"), ks::profile_csv(p1.profile));
    ks::write_text(out_path(cfg, "phi2.csv"), ks::profile_csv(p2.profile));
    ks::write_text(out_path(cfg, "lambda_qbar.csv"), ks::profile_csv(lam.profile));
    ks::write_text(out_path(cfg, "rho.csv"), ks::profile_csv(rho.profile));
  }
  ks::write_text(out_path(cfg, "fundamental_report.json"), rep.dump(2) + "\n");
  const bool ok = w_u.max_rel_dev < 1e-6 && w_p.max_rel_dev < 1e-6 && w_h.max_rel_dev < 1e-6;
  if (!ok) std::cerr << "fundamental: a weighted Wronskian deviates above 1e-6\n";
  return ok ? 0 : 2;
}

int cmd_kummer_check(const ks::RunConfig& cfg) {
  if (cfg.dim != 3) throw ks::ParameterError("kummer-check is d=3 only");
  const ks::Dimension dim(3);
  const auto u1 = ks::fundamental_u1(dim, 1e-6, 40.0);
  double max_rel = 0;
  for (int i = 0; i <= 40; ++i) {
    const double r = 2.0 * std::pow(5.0, i / 40.0);
    const double ode = u1.profile.value(r) / u1.profile.value(5.0);
    const double kum = ks::kummer::u1_via_kummer(r) / ks::kummer::u1_via_kummer(5.0);
    max_rel = std::max(max_rel, std::abs(ode - kum) / std::abs(kum));
  }
  json rep = report_header(cfg);
  rep["max_rel_dev_r_2_10"] = max_rel;
  rep["r2_u1_at_30"] = 900.0 * ks::kummer::u1_via_kummer(30.0);
  ks::write_text(out_path(cfg, "kummer_report.json"), rep.dump(2) + "\n");
  if (max_rel >= 1e-5) {
    std::cerr << "kummer-check: deviation " << max_rel << " >= 1e-5\n";
    return 2;
  }
  return 0;
}

int cmd_shoot_ext(const ks::RunConfig& cfg, double eps) {
  const ks::Dimension dim(cfg.dim);
  const auto sol = ks::shoot_exterior(eps, cfg.r0, dim, cfg.r_max, cfg.tol_ode);
  ks::write_text(out_path(cfg, "exterior.csv"), ks::profile_csv(sol.profile));
  if (cfg.out_dir != "-") {
    json rep = report_header(cfg);
    rep["epsilon"] = eps;
    rep["phi_r0"] = sol.phi_r0;
    rep["dphi_r0"] = sol.dphi_r0;
    rep["residual_sup"] = ks::phi_residual_sup(sol.profile, dim, cfg.r0, cfg.r_max);
    ks::write_text(out_path(cfg, "exterior_report.json"), rep.dump(2) + "\n");
  }
  return 0;
}

int cmd_shoot_int(const ks::RunConfig& cfg, double a) {
  const ks::Dimension dim(cfg.dim);
  const auto sol = ks::shoot_interior(a, cfg.r0, dim, cfg.tol_ode);
  ks::write_text(out_path(cfg, "interior.csv"), ks::profile_csv(sol.profile));
  if (cfg.out_dir != "-") {
    json rep = report_header(cfg);
    rep["a"] = a;
    rep["lambda"] = sol.lambda;
    rep["phi_r0"] = sol.phi_r0;
    rep["dphi_r0"] = sol.dphi_r0;
    rep["residual_sup"] = ks::phi_residual_sup(sol.profile, dim, sol.r_start, cfg.r0);
    ks::write_text(out_path(cfg, "interior_report.json"), rep.dump(2) + "\n");
  }
  return 0;
}

json mu_report(const std::vector<ks::SelfSimilarProfile>& profiles) {
  json arr = json::array();
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const auto& p = profiles[i];
    json row{{"n", p.n},
             {"mu_n", p.mu_n},
             {"eps_n", p.eps_n},
             {"value_gap_rel", p.report.value_gap_rel},
             {"deriv_gap_rel", p.report.deriv_gap_rel},
             {"nonlocal_residual", p.report.nonlocal_residual},
             {"interior_metric", p.report.interior_metric},
             {"exterior_metric", p.report.exterior_metric}};
    if (i > 0) row["ratio"] = p.mu_n / profiles[i - 1].mu_n;
    arr.push_back(row);
  }
  return arr;
}

std::vector<ks::MuTableRow> mu_rows(const std::vector<ks::SelfSimilarProfile>& profiles,
                                    const std::vector<ks::RefinedRoot>& roots) {
  std::vector<ks::MuTableRow> rows;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    rows.push_back({profiles[i].n, profiles[i].mu_n, profiles[i].eps_n,
                    i > 0 ? profiles[i].mu_n / profiles[i - 1].mu_n : 0.0,
                    roots[i].point.value_gap, roots[i].point.deriv_mismatch});
  }
  return rows;
}

std::vector<ks::SelfSimilarProfile> run_matching(const ks::RunConfig& cfg,
                                                 std::vector<ks::RefinedRoot>* roots_out) {
  const ks::Dimension dim(cfg.dim);
  const auto ctx = ks::make_matching_context(dim, cfg.r0, cfg.r_max, 30.0, cfg.tol_ode);
  const double om = dim.omega();
  const double periods = std::max({cfg.scan_periods, double(cfg.n_profiles) + 1.5, 2.01});
  const double a_lo = 1.0 / (2.0 * dim.d * cfg.r0 * cfg.r0);
  const double a_hi = a_lo * std::exp(2.0 * periods * (M_PI / om));
  const auto scan = ks::scan_mismatch(ctx, a_lo, a_hi, std::max(64, int(40 * periods)));
  std::vector<ks::SelfSimilarProfile> profiles;
  std::vector<ks::RefinedRoot> roots;
  const int n = std::min<int>(cfg.n_profiles, int(scan.brackets.size()));
  for (int k = 0; k < n; ++k) {
    const auto [i, j] = scan.brackets[std::size_t(k)];
    roots.push_back(ks::refine_mu(ctx, scan.points[i], scan.points[j], cfg.tol_match));
    profiles.push_back(ks::assemble_profile(ctx, k + 1, roots.back()));
  }
  if (roots_out) *roots_out = roots;
  return profiles;
}

int cmd_match(const ks::RunConfig& cfg) {
  std::vector<ks::RefinedRoot> roots;
  const auto profiles = run_matching(cfg, &roots);
  ks::write_text(out_path(cfg, "mu_table.csv"), ks::mu_table_csv(mu_rows(profiles, roots)));
  if (cfg.out_dir != "-") {
    json rep = report_header(cfg);
    rep["profiles"] = mu_report(profiles);
    ks::write_text(out_path(cfg, "match_report.json"), rep.dump(2) + "\n");
  }
  if (int(profiles.size()) < cfg.n_profiles) {
    std::cerr << "match: only " << profiles.size() << " roots found\n";
    return 2;
  }
  return 0;
}

int cmd_profile(const ks::RunConfig& cfg) {
  std::vector<ks::RefinedRoot> roots;
  const auto profiles = run_matching(cfg, &roots);
  for (const auto& p : profiles) {
    ks::write_text(out_path(cfg, "profile_U_" + std::to_string(p.n) + ".csv"),
                   ks::profile_csv(p.U));
    ks::write_text(out_path(cfg, "profile_Phi_" + std::to_string(p.n) + ".csv"),
                   ks::profile_csv(p.Phi));
  }
  json rep = report_header(cfg);
  rep["profiles"] = mu_report(profiles);
  ks::write_text(out_path(cfg, "profile_report.json"), rep.dump(2) + "\n");
  for (const auto& p : profiles)
    if (p.report.nonlocal_residual > 1e-6 || p.report.deriv_gap_rel > 1e-8) {
      std::cerr << "profile: verification failed for n=" << p.n << "\n";
      return 2;
    }
  return 0;
}

int cmd_verify_explicit(const ks::RunConfig& cfg) {
  const ks::Dimension dim(cfg.dim);
  const auto rep = ks::verify_explicit(dim);
  json out = report_header(cfg);
  out["u_residuals"] = {rep.u0_res, rep.u1_res, rep.u2_res, rep.u3_res};
  out["phi_residuals"] = {rep.p0_res, rep.p1_res, rep.p2_res, rep.p3_res};
  out["max_residual"] = rep.max_residual();
  ks::write_text(out_path(cfg, "explicit_report.json"), out.dump(2) + "\n");
  if (rep.max_residual() >= 1e-8) {
    std::cerr << "verify-explicit: max residual " << rep.max_residual() << " >= 1e-8\n";
    return 2;
  }
  return 0;
}

int cmd_evolve(const ks::RunConfig& cfg) {
  auto cfg1 = cfg;
  cfg1.n_profiles = 1;
  const auto profiles = run_matching(cfg1, nullptr);
  const auto blowup = ks::make_blowup(profiles[0], 1.0);
  json rep = report_header(cfg);
  json typei = json::array();
  for (double frac : {0.0, 0.5, 0.9})
    typei.push_back((blowup.T - frac) * blowup.sup_u(frac));
  rep["type_i_identity"] = typei;
  json lp = json::array();
  for (double frac : {0.9, 0.99, 0.999})
    lp.push_back(ks::lp_distance(blowup, frac, 1.0));
  rep["l1_to_ustar"] = lp;
  rep["tail_A"] = blowup.tail_A;
  ks::write_text(out_path(cfg, "evolve_report.json"), rep.dump(2) + "\n");
  const bool dec = lp[0] > lp[1] && lp[1] > lp[2];
  if (!dec) {
    std::cerr << "evolve: L1 distance to u* not decreasing\n";
    return 2;
  }
  return 0;
}

int cmd_sim(const ks::RunConfig& cfg, int nodes, double t_end) {
  auto cfg1 = cfg;
  cfg1.n_profiles = 1;
  const auto profiles = run_matching(cfg1, nullptr);
  const auto blowup = ks::make_blowup(profiles[0], 1.0);
  const auto grid = ks::make_sim_grid(nodes, 0.12, 40.0);
  const auto u0 = ks::sample_initial_state(blowup, grid);
  const auto res = ks::mol_simulate(u0, t_end, {t_end});
  const auto& fin = res.snapshots.back();
  double track_err = 0;
  for (std::size_t i = 0; i < fin.grid.size(); ++i) {
    const double r = fin.grid.nodes[i];
    if (r < 0.1 || r > 5.0) continue;
    const double ex = blowup.eval(r, fin.t);
    track_err = std::max(track_err, std::abs(fin.u[i] - ex) / std::abs(ex));
  }
  if (cfg.out_dir != "-") {
    std::vector<double> dv(fin.grid.size(), 0.0);
    ks::RadialProfile snap(fin.grid, fin.u, dv);
    ks::write_text(out_path(cfg, "sim_final.csv"), ks::profile_csv(snap));
  }
  json rep = report_header(cfg);
  rep["nodes"] = nodes;
  rep["t_end"] = fin.t;
  rep["steps"] = res.n_steps;
  rep["mass_drift_rel"] = res.mass_drift_rel;
  rep["tracking_rel_sup_0.1_5"] = track_err;
  ks::write_text(out_path(cfg, "sim_report.json"), rep.dump(2) + "\n");
  if (res.mass_drift_rel >= 1e-6) {
    std::cerr << "sim: mass drift " << res.mass_drift_rel << " >= 1e-6\n";
    return 2;
  }
  return 0;
}

int cmd_all(const ks::RunConfig& cfg) {
  struct Step {
    const char* name;
    int rc;
  };
  std::vector<Step> steps;
  steps.push_back({"verify-explicit", cmd_verify_explicit(cfg)});
  steps.push_back({"steady", cmd_steady(cfg)});
  steps.push_back({"fundamental", cmd_fundamental(cfg)});
  if (cfg.dim == 3) steps.push_back({"kummer-check", cmd_kummer_check(cfg)});
  steps.push_back({"match", cmd_match(cfg)});
  steps.push_back({"profile", cmd_profile(cfg)});
  steps.push_back({"evolve", cmd_evolve(cfg)});
  steps.push_back({"sim", cmd_sim(cfg, 500, 0.25)});
  for (const auto& s : steps)
    if (s.rc != 0) {
      std::cerr << "all: step '" << s.name << "' failed verification\n";
      return 2;
    }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-similar blow-up profiles for the radial Keller-Segel system (d=3..9)"};
  app.require_subcommand(1);

  ks::RunConfig cfg;
  std::string config_path;
  app.add_option("--config", config_path, "flat key=value config file");
  app.add_option("--dim", cfg.dim, "space dimension (3..9)");
  app.add_option("--r0", cfg.r0, "matching radius");
  app.add_option("--rmax", cfg.r_max, "outer radius");
  app.add_option("--tol-ode", cfg.tol_ode, "shooting tolerance");
  app.add_option("--tol-match", cfg.tol_match, "mismatch refinement tolerance");
  app.add_option("--n", cfg.n_profiles, "number of profiles");
  app.add_option("--scan-periods", cfg.scan_periods, "scan range in predicted periods");
  app.add_option("--out", cfg.out_dir, "output directory ('-' = stdout)");

  double eps = 1e-3, a_central = 1.0;
  int sim_nodes = 800;
  double sim_t_end = 0.5;
  app.add_subcommand("steady", "steady state Q, Qbar and tail fits");
  app.add_subcommand("fundamental", "fundamental solutions and Wronskian reports");
  app.add_subcommand("kummer-check", "d=3 confluent-hypergeometric cross-validation");
  auto* se = app.add_subcommand("shoot-ext", "single exterior shot");
  se->add_option("--eps", eps, "perturbation amplitude");
  auto* si = app.add_subcommand("shoot-int", "single interior shot");
  si->add_option("--a", a_central, "central value Phi(0)");
  app.add_subcommand("match", "scan mismatch and refine mu_n");
  app.add_subcommand("profile", "assemble and verify U_n");
  app.add_subcommand("verify-explicit", "residual oracle on the explicit solutions");
  app.add_subcommand("evolve", "exact blow-up solution tables");
  auto* sim = app.add_subcommand("sim", "method-of-lines simulation");
  sim->add_option("--nodes", sim_nodes, "grid nodes");
  sim->add_option("--t-end", sim_t_end, "final time (T=1)");
  app.add_subcommand("all", "full pipeline");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (!config_path.empty()) {
      ks::RunConfig file_cfg = ks::load_config_file(config_path);
      // CLI flags override file values.
      for (const std::string opt : {"--dim", "--r0", "--rmax", "--tol-ode", "--tol-match",
                                    "--n", "--scan-periods", "--out"}) {
        if (app.count(opt)) continue;
        if (opt == "--dim") cfg.dim = file_cfg.dim;
        else if (opt == "--r0") cfg.r0 = file_cfg.r0;
        else if (opt == "--rmax") cfg.r_max = file_cfg.r_max;
        else if (opt == "--tol-ode") cfg.tol_ode = file_cfg.tol_ode;
        else if (opt == "--tol-match") cfg.tol_match = file_cfg.tol_match;
        else if (opt == "--n") cfg.n_profiles = file_cfg.n_profiles;
        else if (opt == "--scan-periods") cfg.scan_periods = file_cfg.scan_periods;
        else if (opt == "--out") cfg.out_dir = file_cfg.out_dir;
      }
    }
    cfg.validate();

    if (app.got_subcommand("steady")) return cmd_steady(cfg);
    if (app.got_subcommand("fundamental")) return cmd_fundamental(cfg);
    if (app.got_subcommand("kummer-check")) return cmd_kummer_check(cfg);
    if (app.got_subcommand("shoot-ext")) return cmd_shoot_ext(cfg, eps);
    if (app.got_subcommand("shoot-int")) return cmd_shoot_int(cfg, a_central);
    if (app.got_subcommand("match")) return cmd_match(cfg);
    if (app.got_subcommand("profile")) return cmd_profile(cfg);
    if (app.got_subcommand("verify-explicit")) return cmd_verify_explicit(cfg);
    if (app.got_subcommand("evolve")) return cmd_evolve(cfg);
    if (app.got_subcommand("sim")) return cmd_sim(cfg, sim_nodes, sim_t_end);
    if (app.got_subcommand("all")) return cmd_all(cfg);
  } catch (const ks::ParameterError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
