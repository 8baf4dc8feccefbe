#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "ks/exterior.hpp"
#include "ks/interior.hpp"

using namespace ks;

namespace {
const SteadyPair& steady3() {
  static SteadyPair s = solve_steady(Dimension(3), 45.0);
  return s;
}
const SResolvent& s_res3() {
  static SResolvent s(steady3(), fundamental_lambda_qbar(steady3()),
                      fundamental_rho(steady3(), 1e-4, 40.0));
  return s;
}
}  // namespace

TEST_CASE("interior: series coefficient b = a(1-2da)/(2(d+2))") {
  // d=3, a=1: b = -1/2 (Frobenius balance at r=0)
  const auto sol = shoot_interior(1.0, 0.05, Dimension(3));
  const double r = sol.r_start * 4;
  const double b_fit = (sol.profile.value(r) - 1.0) / (r * r);
  CHECK(b_fit == doctest::Approx(-0.5).epsilon(1e-4));
  // regularity: dPhi(r)/r -> 2b within 1%
  CHECK(sol.profile.deriv(r) / r == doctest::Approx(-1.0).epsilon(0.01));
}

TEST_CASE("interior: a = 1/(2d) tracks Qbar up to the O(r0^2) drift correction") {
  const double r0 = 0.05;
  const auto sol = shoot_interior(1.0 / 6.0, r0, Dimension(3));
  CHECK(sol.lambda == doctest::Approx(1.0));
  const double qb = steady3().Qbar.value(r0);
  CHECK(std::abs(sol.phi_r0 - qb) < 1e-2 * std::abs(qb));
}

TEST_CASE("interior: residual of the nonlinear equation < 1e-7 scaled") {
  const auto sol = shoot_interior(100.0, 0.05, Dimension(3));
  CHECK(phi_residual_sup(sol.profile, Dimension(3), sol.r_start, 0.05) < 1e-7);
}

TEST_CASE("interior: large a approaches the rescaled steady state") {
  const double a = 1e4;
  const auto sol = shoot_interior(a, 0.05, Dimension(3));
  const double lam = sol.lambda;
  double sup = 0;
  for (double z : {0.5, 1.0, 2.0, 5.0}) {
    const double got = lam * lam * sol.profile.value(lam * z);
    const double want = steady3().Qbar.value(z);
    sup = std::max(sup, std::abs(got - want) / std::abs(want));
  }
  CHECK(sup < 0.02);
}

TEST_CASE("interior: continuous parametrization in a") {
  const double r0 = 0.05;
  double v1, d1, v2, d2;
  shoot_interior_boundary(50.0, r0, Dimension(3), 1e-13, v1, d1);
  shoot_interior_boundary(50.0 * (1 + 1e-6), r0, Dimension(3), 1e-13, v2, d2);
  CHECK(std::abs(v2 - v1) / std::abs(v1) < 1e-4);
}

TEST_CASE("extract_Q1: lambda = 1 formal case is Phi - Qbar") {
  const auto sol = shoot_interior(1.0 / 6.0, 0.05, Dimension(3));
  const auto ex = extract_Q1(sol, steady3());
  CHECK(ex.reliable);
  for (std::size_t i = 0; i < ex.q1.grid.size(); i += 30) {
    const double z = ex.q1.grid.nodes[i];
    const double direct = sol.profile.value(z) - steady3().Qbar.value(z);
    CHECK(ex.q1.values[i] == doctest::Approx(direct).epsilon(1e-8).scale(1.0));
  }
}

TEST_CASE("extract_Q1: lambda = 0.1 gives a finite reported Y-norm") {
  // a = 1/(2 d lambda^2) = 100/6 for lambda = 0.1
  const auto sol = shoot_interior(100.0 / 6.0, 0.05, Dimension(3));
  CHECK(sol.lambda == doctest::Approx(0.1).epsilon(1e-12));
  const auto ex = extract_Q1(sol, steady3());
  CHECK(ex.reliable);
  CHECK(std::isfinite(ex.y_norm));
  CHECK(ex.y_norm > 0);
  MESSAGE("||Q1||_Y(r1=", ex.r1, ") = ", ex.y_norm);
}

TEST_CASE("extract_Q1: continuity in a") {
  const auto s1 = shoot_interior(50.0, 0.05, Dimension(3));
  const auto s2 = shoot_interior(50.0 * (1 + 1e-5), 0.05, Dimension(3));
  const auto e1 = extract_Q1(s1, steady3());
  const auto e2 = extract_Q1(s2, steady3());
  double sup = 0;
  for (double z : {e1.q1.grid.nodes.front() * 2, e1.r1 * 0.5}) {
    sup = std::max(sup, std::abs(e1.q1.value(z) - e2.q1.value(z)));
  }
  CHECK(sup < 1e-1 * (1 + std::abs(e1.q1.value(e1.r1 * 0.5))));
}

TEST_CASE("picard_interior: first iterate is S(-LambdaQbar/(2 lambda^2))") {
  const double lam = 0.3, r0 = 0.05;
  const auto out = picard_interior(lam, r0, Dimension(3), steady3(), s_res3(), 1e-9, 1);
  CHECK(out.iterations == 1);
  CHECK(std::isfinite(out.y_norm));
  CHECK(out.y_norm > 0);
}

TEST_CASE("picard_interior vs extract_Q1 at lambda = 0.3 (cross-construction)") {
  const double lam = 0.3, r0 = 0.05;
  const Dimension d3(3);
  const auto pic = picard_interior(lam, r0, d3, steady3(), s_res3());
  CHECK(pic.converged);
  const double a = 1.0 / (2 * 3 * lam * lam);
  const auto sol = shoot_interior(a, r0, d3);
  const auto ex = extract_Q1(sol, steady3());
  const double r1 = r0 / lam;
  const NormSpec y{NormSpec::Tag::Y_r1, r1, d3};
  // compare in Y-norm: ||pic - ex|| / ||ex|| < 5%
  RadialProfile diff = pic.q1;
  for (std::size_t i = 0; i < diff.grid.size(); ++i) {
    const double z = diff.grid.nodes[i];
    if (z < ex.q1.grid.front() || z > ex.q1.grid.back()) {
      diff.values[i] = 0;
      diff.derivs[i] = 0;
      continue;
    }
    diff.values[i] -= ex.q1.value(z);
    diff.derivs[i] -= ex.q1.deriv(z);
  }
  const double rel = weighted_norm(y, diff) / weighted_norm(y, pic.q1);
  CHECK(rel < 0.05);
  MESSAGE("picard vs extract relative Y-difference = ", rel);
}

TEST_CASE("picard_interior: lambda^4 nonlinearity is negligible at small lambda") {
  // dropping the quadratic terms changes Q1 by O(lambda^4 ||Q1||^2):
  // compare one full iteration against the linear-source-only iteration.
  const double lam = 0.1, r0 = 0.05;
  const auto full = picard_interior(lam, r0, Dimension(3), steady3(), s_res3());
  // Source-only solve: J with Q1 = 0 is exactly the first iterate.
  const auto first = picard_interior(lam, r0, Dimension(3), steady3(), s_res3(), 1e-9, 1);
  const double r1 = r0 / lam;
  const NormSpec y{NormSpec::Tag::Y_r1, r1, Dimension(3)};
  RadialProfile diff = full.q1;
  for (std::size_t i = 0; i < diff.grid.size(); ++i) {
    diff.values[i] -= first.q1.values[i];
    diff.derivs[i] -= first.q1.derivs[i];
  }
  // the correction beyond the first iterate carries at least one extra
  // factor lambda^2 r1^2 = r0^2
  CHECK(weighted_norm(y, diff) < 10 * r0 * r0 * weighted_norm(y, full.q1) + 1e-9);
}
