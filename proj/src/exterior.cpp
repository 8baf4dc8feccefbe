#include "ks/exterior.hpp"

#include <cmath>

#include "ks/ivp.hpp"

namespace ks {

double phi_equation_rhs(Dimension dim, double r, double phi, double dphi) {
  const int d = dim.d;
  return -(d + 1) / r * dphi + phi + 0.5 * r * dphi - 2.0 * d * phi * phi -
         2.0 * r * phi * dphi;
}

double phi_equation_third(Dimension dim, double r, double phi, double dphi, double d2phi) {
  const int d = dim.d;
  const double dF_dr = (d + 1) / (r * r) * dphi + 0.5 * dphi - 2.0 * phi * dphi;
  const double dF_dphi = 1.0 - 4.0 * d * phi - 2.0 * r * dphi;
  const double dF_ddphi = -(d + 1) / r + 0.5 * r - 2.0 * r * phi;
  return dF_dr + dF_dphi * dphi + dF_ddphi * d2phi;
}

double phi_residual_sup(const RadialProfile& p, Dimension dim, double r_lo, double r_hi) {
  const int d = dim.d;
  double sup = 0;
  for (std::size_t i = 0; i < p.grid.size(); ++i) {
    const double r = p.grid.nodes[i];
    if (r < r_lo || r > r_hi) continue;
    const double phi = p.values[i], dphi = p.derivs[i], d2 = p.second_deriv(r);
    const double terms[6] = {d2,
                             (d + 1) / r * dphi,
                             -phi,
                             -0.5 * r * dphi,
                             2.0 * d * phi * phi,
                             2.0 * r * phi * dphi};
    double res = 0, scale = 1e-300;
    for (double t : terms) {
      res += t;
      scale += std::abs(t);
    }
    sup = std::max(sup, std::abs(res) / scale);
  }
  return sup;
}

namespace {

Trajectory shoot_exterior_traj(double epsilon, double r0, Dimension dim, double R,
                               double tol) {
  if (!(0 < r0 && r0 < 1)) throw ParameterError("shoot_exterior: need 0 < r0 < 1");
  if (R < 30) throw ParameterError("shoot_exterior: need R >= 30");
  double u1v, u1d;
  u1_series_eval(dim, R, u1v, u1d);
  IvpSpec spec;
  spec.r_start = R;
  spec.r_end = r0;
  spec.y0 = {1.0 / (R * R) + epsilon * u1v, -2.0 / (R * R * R) + epsilon * u1d};
  spec.rtol = tol;
  spec.atol = 1e-16;
  spec.rhs = [dim](double r, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = phi_equation_rhs(dim, r, y[0], y[1]);
  };
  try {
    return integrate_ivp(spec);
  } catch (const IntegrationError& e) {
    throw ShootError(std::string("shoot_exterior: trajectory lost before r0 (") + e.what() +
                         ")",
                     e.last_radius);
  }
}

}  // namespace

void shoot_exterior_boundary(double epsilon, double r0, Dimension dim, double R, double tol,
                             double& phi_r0, double& dphi_r0) {
  const Trajectory traj = shoot_exterior_traj(epsilon, r0, dim, R, tol);
  phi_r0 = traj.nodes.back().y[0];
  dphi_r0 = traj.nodes.back().y[1];
}

ExteriorSolution shoot_exterior(double epsilon, double r0, Dimension dim, double R, double tol,
                                int n_per_decade_inner, int n_per_decade_outer) {
  const Trajectory traj = shoot_exterior_traj(epsilon, r0, dim, R, tol);
  ExteriorSolution sol;
  sol.epsilon = epsilon;
  sol.r0 = r0;
  sol.R = R;
  sol.phi_r0 = traj.nodes.back().y[0];
  sol.dphi_r0 = traj.nodes.back().y[1];
  if (n_per_decade_inner > 0) {
    const int ni = std::max(2, int(n_per_decade_inner * std::log10(1.0 / r0)) + 1);
    const int no = std::max(2, int(n_per_decade_outer * std::log10(R)) + 1);
    const RadialGrid grid = make_graded_grid(r0, R, ni, no);
    sol.profile = traj.sample_pair(0, 1, grid, [dim](double r, std::span<const double> y) {
      return phi_equation_rhs(dim, r, y[0], y[1]);
    });
  }
  return sol;
}

PicardExterior picard_exterior(double epsilon, double r0, Dimension dim,
                               const TauResolvent& tau, double R, double increment_tol,
                               int max_iter) {
  if (!(std::abs(epsilon) * std::pow(r0, -0.5) < 0.1))
    throw ParameterError("picard_exterior: requires eps * r0^{-1/2} < 0.1");
  const int d = dim.d;
  const int ni = std::max(2, int(400 * std::log10(1.0 / r0)) + 1);
  const int no = std::max(2, int(200 * std::log10(R)) + 1);
  const RadialGrid grid = make_graded_grid(r0, R, ni, no);
  const std::size_t n = grid.size();

  std::vector<double> u1v(n), u1d(n), u1dd(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = grid.nodes[i];
    u1v[i] = tau.u1().profile.value(r);
    u1d[i] = tau.u1().profile.deriv(r);
    u1dd[i] = tau.u1().profile.second_deriv(r);
  }

  RadialProfile w(grid, std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                  std::vector<double>(n, 0.0));
  const NormSpec xnorm{NormSpec::Tag::X_r0, r0, dim};

  PicardExterior out;
  out.report.iterations = 0;
  int rising = 0;
  double prev_inc = 0;
  for (int it = 0; it < max_iter; ++it) {
    // G[u1]w = 2 (u1+w) [ r (u1'+w') + d (u1+w) ]
    std::vector<double> g(n), dg(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = grid.nodes[i];
      const double s = u1v[i] + w.values[i];
      const double ds = u1d[i] + w.derivs[i];
      const double d2s = u1dd[i] + w.second[i];
      g[i] = 2 * s * (r * ds + d * s);
      dg[i] = 2 * ds * (r * ds + d * s) + 2 * s * (ds + r * d2s + d * ds);
    }
    const RadialProfile gw = tau.apply(RadialProfile(grid, std::move(g), std::move(dg)));
    RadialProfile w_next = gw;
    for (std::size_t i = 0; i < n; ++i) {
      w_next.values[i] *= epsilon;
      w_next.derivs[i] *= epsilon;
      w_next.second[i] *= epsilon;
    }

    RadialProfile diff = w_next;
    for (std::size_t i = 0; i < n; ++i) {
      diff.values[i] -= w.values[i];
      diff.derivs[i] -= w.derivs[i];
    }
    const double inc = weighted_norm(xnorm, diff);
    out.report.increment_norms.push_back(inc);
    w = std::move(w_next);
    ++out.report.iterations;
    if (it > 0) {
      rising = inc >= prev_inc ? rising + 1 : 0;
      if (rising >= 3)
        throw ConvergenceError("picard_exterior: increments non-contractive for 3 iterations");
    }
    prev_inc = inc;
    if (inc < increment_tol) {
      out.report.converged = true;
      break;
    }
  }
  out.report.w_norm = weighted_norm(xnorm, w);

  std::vector<double> av(n), ad(n), a2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = grid.nodes[i];
    av[i] = 1.0 / (r * r) + epsilon * u1v[i] + epsilon * w.values[i];
    ad[i] = -2.0 / (r * r * r) + epsilon * u1d[i] + epsilon * w.derivs[i];
    a2[i] = 6.0 / (r * r * r * r) + epsilon * u1dd[i] + epsilon * w.second[i];
  }
  out.assembled = RadialProfile(grid, std::move(av), std::move(ad), std::move(a2));
  out.w = std::move(w);
  return out;
}

}  // namespace ks
