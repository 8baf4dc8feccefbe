#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "ks/exterior.hpp"
#include "ks/linear_ops.hpp"

using namespace ks;

namespace {
const TauResolvent& tau3() {
  static TauResolvent t = [] {
    FundamentalSolution u1 = fundamental_u1(Dimension(3), 1e-3, 40.0);
    FundamentalSolution v2 = fundamental_v2(Dimension(3), u1, 1e-3, 40.0);
    return TauResolvent(Dimension(3), std::move(u1), std::move(v2));
  }();
  return t;
}
}  // namespace

TEST_CASE("exterior: eps = 0 reproduces Phi_* exactly") {
  const auto sol = shoot_exterior(0.0, 0.05, Dimension(3), 30.0);
  double sup = 0;
  for (std::size_t i = 0; i < sol.profile.grid.size(); ++i) {
    const double r = sol.profile.grid.nodes[i];
    sup = std::max(sup, std::abs(sol.profile.values[i] - 1.0 / (r * r)) * r * r);
  }
  CHECK(sup < 1e-9);
}

TEST_CASE("exterior: nonlinear residual scaled sup < 1e-7") {
  const auto sol = shoot_exterior(1e-3, 0.05, Dimension(3), 30.0);
  CHECK(phi_residual_sup(sol.profile, Dimension(3), 0.05, 30.0) < 1e-7);
}

TEST_CASE("exterior: (1+r^2)|Phi - Phi_*| bounded by C eps (first-order oracle)") {
  const double r0 = 0.05;
  const Dimension d3(3);
  auto dev = [&](double eps) {
    const auto sol = shoot_exterior(eps, r0, d3, 30.0);
    double sup = 0;
    for (std::size_t i = 0; i < sol.profile.grid.size(); ++i) {
      const double r = sol.profile.grid.nodes[i];
      sup = std::max(sup,
                     (1 + r * r) * std::abs(sol.profile.values[i] - 1.0 / (r * r)));
    }
    return sup;
  };
  const double d1 = dev(1e-3), d2 = dev(5e-4);
  CHECK(d1 / 1e-3 == doctest::Approx(d2 / 5e-4).epsilon(0.02));  // linear in eps
  MESSAGE("fitted C = ", d1 / 1e-3);
}

TEST_CASE("exterior: first-order consistency (Phi_eps - Phi_*)/eps -> u1") {
  const double r0 = 0.05;
  const Dimension d3(3);
  const auto u1 = fundamental_u1(d3, 1e-3, 40.0);
  auto dev_from_u1 = [&](double eps) {
    const auto sol = shoot_exterior(eps, r0, d3, 30.0);
    double sup = 0;
    for (double r : {0.06, 0.1, 0.5, 1.0, 3.0, 8.0}) {
      const double v = (sol.profile.value(r) - 1.0 / (r * r)) / eps;
      sup = std::max(sup, std::abs(v - u1.profile.value(r)) / std::abs(u1.profile.value(r)));
    }
    return sup;
  };
  const double e1 = dev_from_u1(1e-3), e2 = dev_from_u1(5e-4);
  CHECK(e2 < 0.6 * e1);  // Richardson: linear vanishing
}

TEST_CASE("exterior: even/odd splitting, boundary symmetric to O(eps^2)") {
  const double r0 = 0.05, eps = 1e-3;
  const Dimension d3(3);
  double vp, dp, vm, dm;
  shoot_exterior_boundary(eps, r0, d3, 30.0, 1e-13, vp, dp);
  shoot_exterior_boundary(-eps, r0, d3, 30.0, 1e-13, vm, dm);
  const double phi_star = 1.0 / (r0 * r0);
  const double sym = std::abs(vp + vm - 2 * phi_star);
  // the O(eps) parts cancel; what is left is O(eps^2 u1(r0)-scale)
  CHECK(sym < 50.0 * eps * eps / std::pow(r0, 2.5));
  CHECK(sym > 0);
}

TEST_CASE("exterior: d_eps continuity of the boundary value") {
  const double r0 = 0.05, eps = 1e-3, del = 1e-5;
  const Dimension d3(3);
  double v1, d1, v2, d2, v3, d3v;
  shoot_exterior_boundary(eps, r0, d3, 30.0, 1e-13, v1, d1);
  shoot_exterior_boundary(eps + del, r0, d3, 30.0, 1e-13, v2, d2);
  shoot_exterior_boundary(eps + 2 * del, r0, d3, 30.0, 1e-13, v3, d3v);
  const double fd1 = (v2 - v1) / del, fd2 = (v3 - v2) / del;
  CHECK(std::abs(fd1 - fd2) / std::abs(fd1) < 1e-3);  // stable to 3 digits
}

TEST_CASE("picard: eps = 0 gives w = 0 after one iteration") {
  const auto out = picard_exterior(0.0, 0.05, Dimension(3), tau3(), 30.0);
  CHECK(out.report.iterations == 1);
  CHECK(out.report.w_norm == 0.0);
}

TEST_CASE("picard: geometric contraction and norm bound shape") {
  const double r0 = 0.05, eps = 1e-3;
  const auto out = picard_exterior(eps, r0, Dimension(3), tau3(), 30.0);
  CHECK(out.report.converged);
  const auto& inc = out.report.increment_norms;
  REQUIRE(inc.size() >= 3);
  for (std::size_t i = 1; i + 1 < inc.size(); ++i) CHECK(inc[i + 1] < 0.5 * inc[i]);
  MESSAGE("||w||_X / (eps r0^-1/2) = ", out.report.w_norm / (eps / std::sqrt(r0)));
}

TEST_CASE("picard vs shooting: two constructions of the same solution") {
  const double r0 = 0.05, eps = 1e-3;
  const Dimension d3(3);
  const auto pic = picard_exterior(eps, r0, d3, tau3(), 30.0);
  const auto sh = shoot_exterior(eps, r0, d3, 30.0);
  double sup = 0;
  for (std::size_t i = 0; i < pic.assembled.grid.size(); ++i) {
    const double r = pic.assembled.grid.nodes[i];
    if (r > 5.0) break;
    sup = std::max(sup, std::abs(pic.assembled.values[i] - sh.profile.value(r)) /
                            std::abs(sh.profile.value(r)));
  }
  CHECK(sup < 1e-5);
}

TEST_CASE("picard: precondition guard") {
  CHECK_THROWS_AS(picard_exterior(0.5, 0.05, Dimension(3), tau3(), 30.0), ParameterError);
}
