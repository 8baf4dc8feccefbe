#include "ks/interior.hpp"

#include <cmath>

#include "ks/exterior.hpp"  // phi_equation_rhs
#include "ks/ivp.hpp"

namespace ks {

namespace {

Trajectory shoot_interior_traj(double a, double r0, Dimension dim, double tol,
                               double& r_start) {
  if (!(a > 0)) throw ParameterError("shoot_interior: central value must be positive");
  if (!(0 < r0 && r0 < 1)) throw ParameterError("shoot_interior: need 0 < r0 < 1");
  const int d = dim.d;
  const double b = a * (1.0 - 2.0 * d * a) / (2.0 * (d + 2));
  r_start = 1e-6 * std::min(1.0, 1.0 / std::sqrt(a));
  IvpSpec spec;
  spec.r_start = r_start;
  spec.r_end = r0;
  spec.y0 = {a + b * r_start * r_start, 2.0 * b * r_start};
  spec.rtol = tol;
  spec.atol = tol * std::max(1.0, a);
  spec.rhs = [dim](double r, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = phi_equation_rhs(dim, r, y[0], y[1]);
  };
  try {
    return integrate_ivp(spec);
  } catch (const IntegrationError& e) {
    throw ShootError(std::string("shoot_interior: failed before r0 (") + e.what() + ")",
                     e.last_radius);
  }
}

}  // namespace

void shoot_interior_boundary(double a, double r0, Dimension dim, double tol, double& phi_r0,
                             double& dphi_r0) {
  double r_start;
  const Trajectory traj = shoot_interior_traj(a, r0, dim, tol, r_start);
  phi_r0 = traj.nodes.back().y[0];
  dphi_r0 = traj.nodes.back().y[1];
}

InteriorSolution shoot_interior(double a, double r0, Dimension dim, double tol,
                                int n_per_decade) {
  InteriorSolution sol;
  const Trajectory traj = shoot_interior_traj(a, r0, dim, tol, sol.r_start);
  sol.a = a;
  sol.lambda = 1.0 / std::sqrt(2.0 * dim.d * a);
  sol.r0 = r0;
  sol.phi_r0 = traj.nodes.back().y[0];
  sol.dphi_r0 = traj.nodes.back().y[1];
  const int n = std::max(2, int(n_per_decade * std::log10(r0 / sol.r_start)) + 1);
  const RadialGrid grid = make_log_grid(sol.r_start, r0, n);
  sol.profile = traj.sample_pair(0, 1, grid, [dim](double r, std::span<const double> y) {
    return phi_equation_rhs(dim, r, y[0], y[1]);
  });
  return sol;
}

Q1Extract extract_Q1(const InteriorSolution& sol, const SteadyPair& steady) {
  const double lam = sol.lambda;
  const double lam2 = lam * lam, lam4 = lam2 * lam2;
  Q1Extract out;
  out.reliable = lam4 >= 1e-14;
  out.r1 = sol.r0 / lam;
  const double z_min = 10.0 * sol.r_start / lam;
  if (steady.Qbar.grid.back() < out.r1 * (1 - 1e-12))
    throw DomainError("extract_Q1: steady grid does not reach r0/lambda");
  const int n = std::max(2, int(300 * std::log10(out.r1 / z_min)) + 1);
  const RadialGrid grid = make_log_grid(z_min, out.r1, n);
  std::vector<double> v(grid.size()), dv(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double z = grid.nodes[i];
    v[i] = (lam2 * sol.profile.value(lam * z) - steady.Qbar.value(z)) / lam4;
    dv[i] = (lam2 * lam * sol.profile.deriv(lam * z) - steady.Qbar.deriv(z)) / lam4;
  }
  out.q1 = RadialProfile(grid, std::move(v), std::move(dv));
  out.y_norm = weighted_norm({NormSpec::Tag::Y_r1, out.r1, steady.dim}, out.q1);
  return out;
}

PicardInterior picard_interior(double lambda, double r0, Dimension dim,
                               const SteadyPair& steady, const SResolvent& S,
                               double increment_tol, int max_iter) {
  if (!(r0 * r0 < 0.5))
    throw ParameterError("picard_interior: requires lambda^2 r1^2 = r0^2 << 1");
  if (steady.dim.d != dim.d) throw ParameterError("picard_interior: dimension mismatch");
  const int d = dim.d;
  const double lam2 = lambda * lambda, lam4 = lam2 * lam2;
  const double r1 = r0 / lambda;
  const double z_lo = std::max(S.rho().profile.grid.front(), r1 * 1e-6);
  const int n = std::max(2, int(300 * std::log10(r1 / z_lo)) + 1);
  const RadialGrid grid = make_log_grid(z_lo, r1, n);
  const std::size_t m = grid.size();

  std::vector<double> lv(m), ld(m);
  const FundamentalSolution& lam_qb = S.lambda_qbar();
  for (std::size_t i = 0; i < m; ++i) {
    lv[i] = lam_qb.profile.value(grid.nodes[i]);
    ld[i] = lam_qb.profile.deriv(grid.nodes[i]);
  }

  PicardInterior out;
  RadialProfile q1(grid, std::vector<double>(m, 0.0), std::vector<double>(m, 0.0),
                   std::vector<double>(m, 0.0));
  const NormSpec ynorm{NormSpec::Tag::Y_r1, r1, dim};
  double prev_inc = 0;
  int rising = 0;
  for (int it = 0; it < max_iter; ++it) {
    std::vector<double> j(m), dj(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double z = grid.nodes[i];
      const double q = q1.values[i], dq = q1.derivs[i], d2q = q1.second[i];
      j[i] = -lv[i] / (2 * lam2) - 0.5 * lam2 * (2 * q + z * dq) +
             lam4 * (2 * d * q * q + 2 * z * q * dq);
      dj[i] = -ld[i] / (2 * lam2) - 0.5 * lam2 * (3 * dq + z * d2q) +
              lam4 * (4 * d * q * dq + 2 * (q * dq + z * dq * dq + z * q * d2q));
    }
    RadialProfile q_next = S.apply(RadialProfile(grid, std::move(j), std::move(dj)));
    RadialProfile diff = q_next;
    for (std::size_t i = 0; i < m; ++i) {
      diff.values[i] -= q1.values[i];
      diff.derivs[i] -= q1.derivs[i];
    }
    const double inc = weighted_norm(ynorm, diff);
    out.increment_norms.push_back(inc);
    q1 = std::move(q_next);
    ++out.iterations;
    if (it > 0) {
      rising = inc >= prev_inc ? rising + 1 : 0;
      if (rising >= 3)
        throw ConvergenceError("picard_interior: increments non-contractive for 3 iterations");
    }
    prev_inc = inc;
    if (inc < increment_tol) {
      out.converged = true;
      break;
    }
  }
  out.y_norm = weighted_norm(ynorm, q1);
  out.q1 = std::move(q1);
  return out;
}

}  // namespace ks
