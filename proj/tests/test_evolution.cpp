#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "ks/evolution.hpp"

using namespace ks;

namespace {

// One assembled profile shared by the whole suite (built once: ~seconds).
const SelfSimilarProfile& profile1() {
  static std::vector<SelfSimilarProfile> ps = [] {
    const MatchingContext ctx = make_matching_context(Dimension(3), 0.05);
    return build_profiles(ctx, 1);
  }();
  return ps[0];
}

}  // namespace

TEST_CASE("exact solution: initial data u0 = U_n(x/sqrt(T))/T") {
  const BlowupSolution sol = make_blowup(profile1(), 4.0);
  for (double x : {0.01, 0.3, 2.0}) {
    CHECK(sol.eval(x, 0.0) ==
          doctest::Approx(profile1().U.value(x / 2.0) / 4.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(sol.eval(1.0, 4.0), DomainError);
}

TEST_CASE("type-I identity: (T-t) sup u constant") {
  const BlowupSolution sol = make_blowup(profile1(), 1.0);
  const double s0 = 1.0 * sol.sup_u(0.0);
  for (double frac : {0.5, 0.9}) {
    const double st = (1.0 - frac) * sol.sup_u(frac);
    CHECK(std::abs(st - s0) / s0 < 1e-12);
  }
}

TEST_CASE("blow-up locality: sup_{|x|>=delta} u <= C/delta^2 uniformly in t") {
  const BlowupSolution sol = make_blowup(profile1(), 1.0);
  const double C = 3.0 * std::max(sol.tail_A, profile1().report.sup_U *
                                                  0.05 * 0.05);  // tail scale
  for (double delta : {0.1, 0.5, 1.0}) {
    for (double frac : {0.0, 0.9, 0.999}) {
      double sup = 0;
      for (int i = 0; i <= 60; ++i) {
        const double x = delta * std::pow(40.0 / delta, i / 60.0);
        sup = std::max(sup, sol.eval(x, frac));
      }
      CHECK(sup <= C / (delta * delta));
    }
  }
}

TEST_CASE("pointwise limit: u(1,t) -> u*(1) = tail model of 2(d-2)") {
  const BlowupSolution sol = make_blowup(profile1(), 1.0);
  const double u_lim = sol.eval(1.0, 0.999);
  CHECK(std::abs(u_lim - sol.u_star(1.0)) / sol.u_star(1.0) < 0.01);
  // |u*(x)| ~ 1/x^2 with coefficient near 2(d-2) = 2
  CHECK(sol.tail_A == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("lp_distance: decreasing toward the blow-up time; sharp exponent guard") {
  const BlowupSolution sol = make_blowup(profile1(), 1.0);
  for (double p : {1.0, 1.4}) {
    const double d1 = lp_distance(sol, 0.9, p);
    const double d2 = lp_distance(sol, 0.99, p);
    const double d3 = lp_distance(sol, 0.999, p);
    CHECK(d1 > d2);
    CHECK(d2 > d3);
  }
  CHECK_THROWS_AS(lp_distance(sol, 0.9, 1.5), ParameterError);
}

TEST_CASE("mol: zero initial data stays zero") {
  const RadialGrid g = make_sim_grid(200, 0.12, 20.0);
  PdeState u0{g, std::vector<double>(g.size(), 0.0), 0.0, Dimension(3)};
  const MolResult res = mol_simulate(u0, 0.1, {});
  for (double u : res.snapshots.back().u) CHECK(u == 0.0);
}

TEST_CASE("mol: mass audit against tracked boundary flux") {
  const BlowupSolution sol = make_blowup(profile1(), 1.0);
  const RadialGrid g = make_sim_grid(400, 0.12, 40.0);
  const PdeState u0 = sample_initial_state(sol, g);
  const MolResult res = mol_simulate(u0, 0.1, {});
  CHECK(res.mass_drift_rel < 1e-6);
}

TEST_CASE("mol: tracks the exact self-similar solution to t = 0.5T within 2%") {
  const BlowupSolution sol = make_blowup(profile1(), 1.0);
  const RadialGrid g = make_sim_grid(800, 0.12, 40.0);
  const PdeState u0 = sample_initial_state(sol, g);
  const MolResult res = mol_simulate(u0, 0.5, {});
  REQUIRE(res.completed);
  const PdeState& fin = res.snapshots.back();
  double err = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.nodes[i];
    if (r < 0.1 || r > 5.0) continue;
    const double ex = sol.eval(r, fin.t);
    err = std::max(err, std::abs(fin.u[i] - ex) / std::abs(ex));
  }
  MESSAGE("tracking error at 800 nodes: ", err);
  CHECK(err < 0.02);

  // comparison lower bound: sup u >= (1 - tol)/(T - t) along the run
  double sup = 0;
  for (double u : fin.u) sup = std::max(sup, u);
  CHECK(sup >= (1.0 - 0.05) / (1.0 - fin.t));

  // halving the resolution parameters reduces the error by >= 3x
  const RadialGrid gc = make_sim_grid(400, 0.12, 40.0);
  const PdeState u0c = sample_initial_state(sol, gc);
  const MolResult resc = mol_simulate(u0c, 0.5, {});
  double errc = 0;
  const PdeState& finc = resc.snapshots.back();
  for (std::size_t i = 0; i < gc.size(); ++i) {
    const double r = gc.nodes[i];
    if (r < 0.1 || r > 5.0) continue;
    const double ex = sol.eval(r, finc.t);
    errc = std::max(errc, std::abs(finc.u[i] - ex) / std::abs(ex));
  }
  MESSAGE("tracking error at 400 nodes: ", errc);
  CHECK(errc >= 3.0 * err);
}

TEST_CASE("type-I within discretization error for the simulated run up to 0.5T") {
  const BlowupSolution sol = make_blowup(profile1(), 1.0);
  const RadialGrid g = make_sim_grid(400, 0.12, 40.0);
  const PdeState u0 = sample_initial_state(sol, g);
  const MolResult res = mol_simulate(u0, 0.5, {0.25});
  for (const PdeState& st : res.snapshots) {
    double sup = 0;
    for (double u : st.u) sup = std::max(sup, u);
    const double id = (1.0 - st.t) * sup;
    CHECK(std::abs(id - profile1().report.sup_U) / profile1().report.sup_U < 0.05);
  }
}
