#include "ks/steady.hpp"

#include <cmath>

#include "ks/quadrature.hpp"

namespace ks {

namespace {

constexpr double kSeriesStart = 1e-6;

// Qbar'' = G(r, Qbar, Qbar') for the reduced-mass steady equation.
inline double qbar_rhs(int d, double r, double q, double dq) {
  return -(d + 1) / r * dq - 2.0 * d * q * q - 2.0 * r * q * dq;
}

// dG/dr + dG/dq q' + dG/dq' q''  (for analytic third derivatives).
inline double qbar_third(int d, double r, double q, double dq, double d2q) {
  const double dG_dr = (d + 1) / (r * r) * dq - 2.0 * q * dq;
  const double dG_dq = -4.0 * d * q - 2.0 * r * dq;
  const double dG_ddq = -(d + 1) / r - 2.0 * r * q;
  return dG_dr + dG_dq * dq + dG_ddq * d2q;
}

}  // namespace

double SteadyPair::weight_exp(double r) const { return std::exp(intW.value(r)); }

SteadyPair solve_steady(Dimension dim, double r_max, double tol) {
  if (r_max < 30.0) throw ParameterError("solve_steady: r_max must be >= 30");
  if (tol > 1e-9) throw ParameterError("solve_steady: tol must be <= 1e-9");
  const int d = dim.d;
  const double a = dim.qbar0();
  const double b = -d * a * a / (d + 2);
  const double r0 = kSeriesStart;

  IvpSpec spec;
  spec.r_start = r0;
  spec.r_end = r_max;
  // y = (Qbar, Qbar', intW)
  spec.y0 = {a + b * r0 * r0, 2 * b * r0, a * r0 * r0 + 0.5 * b * r0 * r0 * r0 * r0};
  spec.rtol = tol;
  spec.atol = tol * 1e-2;
  spec.rhs = [d](double r, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = qbar_rhs(d, r, y[0], y[1]);
    dy[2] = 2.0 * r * y[0];
  };
  const Trajectory traj = integrate_ivp(spec);

  const RadialGrid grid = make_graded_grid(r0, r_max, 1100, 1100);
  RadialProfile qbar = traj.sample_pair(0, 1, grid, [d](double r, std::span<const double> y) {
    return qbar_rhs(d, r, y[0], y[1]);
  });

  const std::size_t n = grid.size();
  std::vector<double> qv(n), qd(n), q2(n), wv(n), wd(n), w2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = grid.nodes[i];
    const double q = qbar.values[i], dq = qbar.derivs[i], d2q = qbar.second[i];
    const double d3q = qbar_third(d, r, q, dq, d2q);
    qv[i] = 2 * d * q + 2 * r * dq;
    qd[i] = (2 * d + 2) * dq + 2 * r * d2q;
    q2[i] = (2 * d + 4) * d2q + 2 * r * d3q;
    wv[i] = traj.eval(2, r);
    wd[i] = 2 * r * q;
    w2[i] = 2 * q + 2 * r * dq;
  }
  SteadyPair pair{dim, std::move(qbar),
                  RadialProfile(grid, std::move(qv), std::move(qd), std::move(q2)),
                  RadialProfile(grid, std::move(wv), std::move(wd), std::move(w2))};
  return pair;
}

RadialProfile solve_steady_direct(Dimension dim, double r_max, double tol) {
  const int d = dim.d;
  const double q2c = -1.0 / (2 * d);
  const double r0 = kSeriesStart;
  IvpSpec spec;
  spec.r_start = r0;
  spec.r_end = r_max;
  // y = (Q, Q', m) with m = \int_0^r Q s^{d-1} ds
  spec.y0 = {1 + q2c * r0 * r0, 2 * q2c * r0,
             std::pow(r0, d) / d + q2c * std::pow(r0, d + 2) / (d + 2)};
  spec.rtol = tol;
  spec.atol = tol * 1e-2;
  spec.rhs = [d](double r, std::span<const double> y, std::span<double> dy) {
    const double nl = y[2] / std::pow(r, d - 1);
    dy[0] = y[1];
    dy[1] = -(d - 1) / r * y[1] - y[0] * y[0] - y[1] * nl;
    dy[2] = y[0] * std::pow(r, d - 1);
  };
  const Trajectory traj = integrate_ivp(spec);
  const RadialGrid grid = make_graded_grid(r0, r_max, 700, 700);
  return traj.sample_pair(0, 1, grid);
}

RadialProfile mass_transform(const RadialProfile& U, Dimension dim) {
  const int d = dim.d;
  const RadialProfile I = cumulative_integral(U, d - 1);
  const std::size_t n = U.grid.size();
  std::vector<double> v(n), dv(n), d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = U.grid.nodes[i];
    const double u = U.values[i], du = U.derivs[i];
    const double phi = I.values[i] / (2 * std::pow(r, d));
    const double dphi = u / (2 * r) - d * phi / r;
    v[i] = phi;
    dv[i] = dphi;
    d2[i] = du / (2 * r) - u / (2 * r * r) - d * dphi / r + d * phi / (r * r);
  }
  return RadialProfile(U.grid, std::move(v), std::move(dv), std::move(d2));
}

RadialProfile mass_transform_inverse(const RadialProfile& Phi, Dimension dim) {
  const int d = dim.d;
  const std::size_t n = Phi.grid.size();
  std::vector<double> v(n), dv(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = Phi.grid.nodes[i];
    v[i] = 2 * d * Phi.values[i] + 2 * r * Phi.derivs[i];
    dv[i] = (2 * d + 2) * Phi.derivs[i] + 2 * r * Phi.second_deriv(r);
  }
  return RadialProfile(Phi.grid, std::move(v), std::move(dv));
}

double qbar_equation_residual_sup(const RadialProfile& p, Dimension dim, double r_lo,
                                  double r_hi) {
  const int d = dim.d;
  double sup = 0;
  for (std::size_t i = 0; i < p.grid.size(); ++i) {
    const double r = p.grid.nodes[i];
    if (r < r_lo || r > r_hi) continue;
    const double q = p.values[i], dq = p.derivs[i], d2q = p.second_deriv(r);
    const double res = d2q + (d + 1) / r * dq + 2 * d * q * q + 2 * r * q * dq;
    const double scale = std::abs(d2q) + std::abs((d + 1) / r * dq) + 2 * d * q * q +
                         std::abs(2 * r * q * dq) + 1e-300;
    sup = std::max(sup, std::abs(res) / scale);
  }
  return sup;
}

}  // namespace ks
