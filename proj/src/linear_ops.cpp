#include "ks/linear_ops.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "ks/ivp.hpp"
#include "ks/quadrature.hpp"

namespace ks {

double OperatorKind::beta(double r) const {
  const int d = dim.d;
  switch (tag) {
    case OperatorTag::L:
      return 0.5 * r - (d + 3) / r;
    case OperatorTag::Hinf:
      return -(d + 3) / r;
    case OperatorTag::H: {
      const double qb = steady->Qbar.value(r);
      return -((d + 1) / r + 2 * r * qb);
    }
  }
  return 0;
}

double OperatorKind::gamma(double r) const {
  const int d = dim.d;
  switch (tag) {
    case OperatorTag::L:
      return 1.0 - 4.0 * (d - 1) / (r * r);
    case OperatorTag::Hinf:
      return -4.0 * (d - 1) / (r * r);
    case OperatorTag::H: {
      const double qb = steady->Qbar.value(r);
      const double dqb = steady->Qbar.deriv(r);
      return -(4.0 * d * qb + 2.0 * r * dqb);
    }
  }
  return 0;
}

RadialProfile apply_operator(const OperatorKind& kind, const RadialProfile& u) {
  if (kind.tag == OperatorTag::H && kind.steady == nullptr)
    throw ParameterError("apply_operator: H requires a steady pair");
  const std::size_t n = u.grid.size();
  std::vector<double> v(n), dv(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = u.grid.nodes[i];
    v[i] = -u.second_deriv(r) + kind.beta(r) * u.derivs[i] + kind.gamma(r) * u.values[i];
  }
  return RadialProfile(u.grid, std::move(v), std::move(dv));
}

double operator_residual_sup(const OperatorKind& kind, const RadialProfile& u, double r_lo,
                             double r_hi, double extra_scale) {
  double sup = 0;
  for (std::size_t i = 0; i < u.grid.size(); ++i) {
    const double r = u.grid.nodes[i];
    if (r < r_lo || r > r_hi) continue;
    const double d2 = u.second_deriv(r);
    const double bu = kind.beta(r) * u.derivs[i];
    const double gu = kind.gamma(r) * u.values[i];
    const double res = -d2 + bu + gu;
    const double scale = std::abs(d2) + std::abs(bu) + std::abs(gu) + extra_scale + 1e-300;
    sup = std::max(sup, std::abs(res) / scale);
  }
  return sup;
}

// --- series ------------------------------------------------------------------

std::vector<double> u1_series_coeffs(Dimension dim, int k_max) {
  const int d = dim.d;
  std::vector<double> c(k_max + 1);
  c[0] = 1.0;
  for (int k = 1; k <= k_max; ++k)
    c[k] = (-2.0 * k * (2 * k + 1) + 2.0 * k * (d + 3) - 4.0 * (d - 1)) * c[k - 1] / k;
  return c;
}

std::vector<double> v2_series_coeffs(Dimension dim, int j_max) {
  const int d = dim.d;
  std::vector<double> e(j_max + 1);
  e[0] = 1.0;
  for (int j = 1; j <= j_max; ++j) {
    const double nn = d + 2 * j;  // exponent of the previous term
    const double P = -nn * (nn + 1) + (d + 3) * nn - 4.0 * (d - 1);
    e[j] = -P * e[j - 1] / j;
  }
  return e;
}

void u1_series_eval(Dimension dim, double r, double& val, double& der) {
  const auto c = u1_series_coeffs(dim, 4);
  val = der = 0;
  for (int k = 0; k <= 4; ++k) {
    const double p = -2.0 - 2.0 * k;
    val += c[k] * std::pow(r, p);
    der += c[k] * p * std::pow(r, p - 1);
  }
}

void v2_series_eval(Dimension dim, double r, double& val, double& der) {
  const auto e = v2_series_coeffs(dim, 3);
  const int d = dim.d;
  val = der = 0;
  for (int j = 0; j <= 3; ++j) {
    const double p = -(d + 2.0) - 2.0 * j;
    val += e[j] * std::pow(r, p);
    der += e[j] * p * std::pow(r, p - 1);
  }
}

// --- fundamental solutions ---------------------------------------------------

namespace {

RadialGrid fundamental_grid(double r_lo, double r_hi, int per_decade_inner,
                            int per_decade_outer) {
  const double split = std::min(1.0, r_hi);
  if (r_lo >= split) {
    const int n = std::max(2, int(per_decade_outer * std::log10(r_hi / r_lo)) + 1);
    return make_log_grid(r_lo, r_hi, n);
  }
  const int ni = std::max(2, int(per_decade_inner * std::log10(1.0 / r_lo)) + 1);
  const int no = std::max(2, int(per_decade_outer * std::log10(r_hi)) + 1);
  return make_graded_grid(r_lo, r_hi, ni, no);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Two-term power-law model A s^p (1 + B s^-2) fitted to samples at three
// wide-baseline nodes (local exponents p_loc(s) = p - 2B/s^2 solved
// linearly). Falls back to the single-term exponent when the data do not
// support the fit.
void fit_power_pair(const std::vector<double>& r, const std::vector<double>& g,
                    double fallback_p, double& p, double& B) {
  const std::size_t n = r.size();
  auto back_from = [&](std::size_t j) {
    std::size_t i = j;
    while (i > 0 && std::log(r[j] / r[i]) < 0.3) --i;
    return i;
  };
  const std::size_t i2 = n - 1, i1 = back_from(i2), i0 = back_from(i1);
  p = fitted_tail_exponent(r[n - 2], g[n - 2], r[n - 1], g[n - 1], fallback_p);
  B = 0;
  if (i0 < i1 && i1 < i2 && g[i0] != 0 && g[i1] != 0 && g[i2] != 0 &&
      (g[i0] > 0) == (g[i1] > 0) && (g[i1] > 0) == (g[i2] > 0)) {
    const double pa = std::log(std::abs(g[i1] / g[i0])) / std::log(r[i1] / r[i0]);
    const double pb = std::log(std::abs(g[i2] / g[i1])) / std::log(r[i2] / r[i1]);
    const double sa = std::sqrt(r[i0] * r[i1]);  // representative radii
    const double sb = std::sqrt(r[i1] * r[i2]);
    const double det = 1.0 / (sb * sb) - 1.0 / (sa * sa);
    if (det != 0) {
      const double twoB = (pa - pb) / det;
      const double pp = pa + twoB / (sa * sa);
      if (std::isfinite(pp) && std::isfinite(twoB) && std::abs(twoB) < 1e3) {
        p = pp;
        B = 0.5 * twoB;
      }
    }
  }
}

}  // namespace

FundamentalSolution fundamental_u1(Dimension dim, double r_lo, double R, double tol,
                                   int n_inner_per_decade, int n_outer_per_decade) {
  if (R < 30) throw ParameterError("fundamental_u1: seed radius must be >= 30");
  const OperatorKind L{OperatorTag::L, dim, nullptr};
  IvpSpec spec;
  spec.r_start = R;
  spec.r_end = r_lo;
  double v, dv;
  u1_series_eval(dim, R, v, dv);
  spec.y0 = {v, dv};
  spec.rtol = tol;
  spec.atol = 1e-18;
  spec.rhs = [L](double r, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = L.beta(r) * y[1] + L.gamma(r) * y[0];
  };
  const Trajectory traj = integrate_ivp(spec);
  const RadialGrid grid = fundamental_grid(r_lo, R, n_inner_per_decade, n_outer_per_decade);
  RadialProfile prof = traj.sample_pair(0, 1, grid, [L](double r, std::span<const double> y) {
    return L.beta(r) * y[1] + L.gamma(r) * y[0];
  });
  return FundamentalSolution{FundKind::u1, dim, std::move(prof), R};
}

// Segment integral of h(s) = g(s) e^{(s^2 - b^2)/4} over [a, b], with g and
// g' supplied by callbacks; subdivides so the kernel varies by at most e^0.6
// per piece.
template <class G, class dG>
static double kernel_segment_integral(double a, double b, G g, dG dg) {
  const int n_sub = std::max(1, std::min(400, int((b * b - a * a) / (4.0 * 0.1)) + 1));
  double acc = 0;
  double s0 = a;
  for (int k = 0; k < n_sub; ++k) {
    const double s1 = k + 1 == n_sub ? b : a + (b - a) * (k + 1) / n_sub;
    const double f0 = std::exp((s0 * s0 - b * b) / 4.0);
    const double f1 = std::exp((s1 * s1 - b * b) / 4.0);
    const double h0 = g(s0) * f0, h1 = g(s1) * f1;
    const double dh0 = (dg(s0) + 0.5 * s0 * g(s0)) * f0;
    const double dh1 = (dg(s1) + 0.5 * s1 * g(s1)) * f1;
    acc += hermite_segment_integral(s0, s1, h0, h1, dh0, dh1);
    s0 = s1;
  }
  return acc;
}

FundamentalSolution fundamental_v2(Dimension dim, const FundamentalSolution& u1, double r_lo,
                                   double R, double tol) {
  const int d = dim.d;
  if (u1.profile.grid.front() > r_lo * (1 + 1e-12) || u1.profile.grid.back() < R * (1 - 1e-12))
    throw ParameterError("fundamental_v2: u1 does not cover [r_lo, R]");
  auto rhs2 = [d](double r, double vv, double dvv) {
    return -(0.5 * r + (d + 3) / r) * dvv - (0.5 * (d + 2) + 4.0 * (d - 1) / (r * r)) * vv;
  };
  auto gfun = [&](double s) {
    const double u = u1.profile.value(s);
    return std::pow(s, -(d + 3)) / (u * u);
  };
  auto dgfun = [&](double s) {
    const double u = u1.profile.value(s);
    const double du = u1.profile.deriv(s);
    return -(d + 3) * std::pow(s, -(d + 4)) / (u * u) -
           2.0 * std::pow(s, -(d + 3)) * du / (u * u * u);
  };

  const RadialGrid grid = fundamental_grid(r_lo, R, 800, 400);
  // r_join on a grid node; the recursion below runs node-to-node (M must not
  // be interpolated: its high derivatives carry (r/2)^k factors).
  std::size_t j0 = 0;
  while (j0 + 1 < grid.size() && grid.nodes[j0] < 4.0) ++j0;
  const double r_join = grid.nodes[j0];

  // Reduction of order above r_join: v2(r) = u1(r) M(r),
  // M(r) = int_{r_join}^r s^{-(d+3)} / u1(s)^2 e^{(s^2-r^2)/4} ds,
  // M' = g(r) - (r/2) M. Kernel-recursive so every exponential is <= 1.
  std::vector<double> M(grid.size(), 0.0);
  for (std::size_t i = j0 + 1; i < grid.size(); ++i) {
    if (u1.profile.value(grid.nodes[i]) <= 0)
      throw IntegrationError("fundamental_v2: u1 not positive beyond r_join", grid.nodes[i]);
    const double fac =
        std::exp((grid.nodes[i - 1] * grid.nodes[i - 1] - grid.nodes[i] * grid.nodes[i]) / 4.0);
    M[i] = M[i - 1] * fac +
           kernel_segment_integral(grid.nodes[i - 1], grid.nodes[i], gfun, dgfun);
  }

  // Below r_join: backward integration of the v-equation; v2 is the
  // backward-growing solution there, so the direction is stable.
  IvpSpec spec;
  spec.r_start = r_join;
  spec.r_end = r_lo;
  spec.y0 = {0.0, u1.profile.value(r_join) * gfun(r_join)};
  spec.rtol = tol;
  spec.atol = 1e-300;
  spec.rhs = [rhs2](double r, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = rhs2(r, y[0], y[1]);
  };
  const Trajectory traj = integrate_ivp(spec);

  std::vector<double> v(grid.size()), dv(grid.size()), d2(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid.nodes[i];
    if (i < j0) {
      v[i] = traj.eval(0, r);
      dv[i] = traj.eval(1, r);
    } else {
      const double dm = gfun(r) - 0.5 * r * M[i];
      v[i] = u1.profile.value(r) * M[i];
      dv[i] = u1.profile.deriv(r) * M[i] + u1.profile.value(r) * dm;
    }
    d2[i] = rhs2(r, v[i], dv[i]);
  }
  RadialProfile prof(grid, std::move(v), std::move(dv), std::move(d2));
  return FundamentalSolution{FundKind::u2_factored, dim, std::move(prof), r_join};
}

FundamentalSolution fundamental_phi(Dimension dim, bool sine, double r_lo, double r_hi,
                                    int n_per_decade) {
  const double sg = dim.sigma(), om = dim.omega();
  const int n = std::max(2, int(n_per_decade * std::log10(r_hi / r_lo)) + 1);
  const RadialGrid grid = make_log_grid(r_lo, r_hi, n);
  auto trig = [&](double r) { return sine ? std::sin(om * std::log(r)) : std::cos(om * std::log(r)); };
  auto trig2 = [&](double r) { return sine ? std::cos(om * std::log(r)) : -std::sin(om * std::log(r)); };
  RadialProfile prof = sample_profile(
      grid, [&](double r) { return trig(r) / std::pow(r, sg); },
      [&](double r) { return (-sg * trig(r) + om * trig2(r)) / std::pow(r, sg + 1); },
      [&](double r) {
        return ((sg * sg + sg - om * om) * trig(r) - (2 * sg + 1) * om * trig2(r)) /
               std::pow(r, sg + 2);
      });
  return FundamentalSolution{sine ? FundKind::phi1 : FundKind::phi2, dim, std::move(prof), 0};
}

FundamentalSolution fundamental_lambda_qbar(const SteadyPair& steady) {
  const RadialProfile& qb = steady.Qbar;
  const std::size_t n = qb.grid.size();
  std::vector<double> v(n), dv(n), d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = qb.grid.nodes[i];
    const double q = qb.values[i], dq = qb.derivs[i], q2 = qb.second[i];
    // third derivative of Qbar from differentiating the steady equation
    const int d = steady.dim.d;
    const double q3 = ((d + 1) / (r * r)) * dq - 2 * q * dq + (-4.0 * d * q - 2 * r * dq) * dq +
                      (-(d + 1) / r - 2 * r * q) * q2;
    v[i] = 2 * q + r * dq;
    dv[i] = 3 * dq + r * q2;
    d2[i] = 4 * q2 + r * q3;
  }
  return FundamentalSolution{FundKind::LambdaQbar, steady.dim,
                             RadialProfile(qb.grid, std::move(v), std::move(dv), std::move(d2)),
                             0};
}

FundamentalSolution fundamental_rho(const SteadyPair& steady, double r_lo, double r_hi,
                                    double tol) {
  const int d = steady.dim.d;
  if (r_hi <= 0) r_hi = steady.Qbar.grid.back();
  const double a = steady.dim.qbar0();
  const double b = -d * a * a / (d + 2);
  // Reduction-of-order expansion near 0 with the regular (LambdaQbar) part
  // dropped: rho ~ LambdaQbar(r) [ g0 r^-d / d + g2 r^-(d-2)/(d-2) ],
  // g(s) = exp(-intW)/LambdaQbar^2 = g0 + g2 s^2 + O(s^4).
  const double g0 = 1.0 / (4 * a * a);
  const double g2 = -(a + 4 * b / a) / (4 * a * a);
  auto lam = [&](double r) { return 2 * a + 4 * b * r * r; };
  auto dlam = [&](double r) { return 8 * b * r; };
  auto bracket = [&](double r) {
    return g0 * std::pow(r, -d) / d + g2 * std::pow(r, -(d - 2)) / (d - 2);
  };
  auto dbracket = [&](double r) {
    return -g0 * std::pow(r, -d - 1) - g2 * std::pow(r, -(d - 1));
  };
  const double r0 = r_lo;
  IvpSpec spec;
  spec.r_start = r0;
  spec.r_end = r_hi;
  spec.y0 = {lam(r0) * bracket(r0), dlam(r0) * bracket(r0) + lam(r0) * dbracket(r0)};
  spec.rtol = tol;
  spec.atol = 1e-300;
  const RadialProfile& qb = steady.Qbar;
  auto rhs2 = [d, &qb](double r, double v, double dv) {
    const double q = qb.value(r), dq = qb.deriv(r);
    return -((d + 1) / r + 2 * r * q) * dv - (4.0 * d * q + 2 * r * dq) * v;
  };
  spec.rhs = [rhs2](double r, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = rhs2(r, y[0], y[1]);
  };
  const Trajectory traj = integrate_ivp(spec);
  const RadialGrid grid = fundamental_grid(r_lo, r_hi, 800, 400);
  RadialProfile prof = traj.sample_pair(0, 1, grid, [rhs2](double r, std::span<const double> y) {
    return rhs2(r, y[0], y[1]);
  });

  // Normalize so that r^{d+1} e^{intW} (LambdaQbar' rho - rho' LambdaQbar) = 1.
  const FundamentalSolution lamf = fundamental_lambda_qbar(steady);
  std::vector<double> ws;
  const double w_lo = std::max(r_lo * 20, 0.02), w_hi = std::min(1.0, r_hi);
  for (int i = 0; i < 60; ++i) {
    const double r = w_lo * std::pow(w_hi / w_lo, i / 59.0);
    const double w = std::pow(r, d + 1) * steady.weight_exp(r) *
                     (lamf.profile.deriv(r) * prof.value(r) -
                      prof.deriv(r) * lamf.profile.value(r));
    ws.push_back(w);
  }
  const double C = median(ws);
  if (C == 0) throw IntegrationError("fundamental_rho: degenerate Wronskian", r_lo);
  for (auto& x : prof.values) x /= C;
  for (auto& x : prof.derivs) x /= C;
  for (auto& x : prof.second) x /= C;
  return FundamentalSolution{FundKind::rho, steady.dim, std::move(prof), r_lo};
}

// --- Wronskians --------------------------------------------------------------

WronskianReport wronskian_check(const FundamentalSolution& a, const FundamentalSolution& b,
                                const SteadyPair* steady, double r_lo, double r_hi,
                                int n_samples) {
  const int d = a.dim.d;
  auto weighted = [&](double r) -> double {
    const double av = a.profile.value(r), ad = a.profile.deriv(r);
    const double bv = b.profile.value(r), bd = b.profile.deriv(r);
    if (a.kind == FundKind::u1 && b.kind == FundKind::u2_factored) {
      // r^{d+3} e^{-r^2/4} (u1' u2 - u2' u1) with u2 = e^{r^2/4} v2
      return std::pow(r, d + 3) * (ad * bv - (bd + 0.5 * r * bv) * av);
    }
    if (a.kind == FundKind::phi1 && b.kind == FundKind::phi2)
      return std::pow(r, d + 3) * (ad * bv - bd * av);
    if (a.kind == FundKind::LambdaQbar && b.kind == FundKind::rho) {
      if (!steady) throw ParameterError("wronskian_check: H pair requires steady");
      return std::pow(r, d + 1) * steady->weight_exp(r) * (ad * bv - bd * av);
    }
    throw ParameterError("wronskian_check: unsupported pair");
  };
  std::vector<double> ws(n_samples);
  for (int i = 0; i < n_samples; ++i)
    ws[i] = weighted(r_lo * std::pow(r_hi / r_lo, i / double(n_samples - 1)));
  WronskianReport rep;
  rep.constant = median(ws);
  for (double w : ws)
    rep.max_rel_dev = std::max(rep.max_rel_dev, std::abs(w - rep.constant) /
                                                    (std::abs(rep.constant) + 1e-300));
  rep.r_lo = r_lo;
  rep.r_hi = r_hi;
  return rep;
}

// --- resolvents --------------------------------------------------------------

TauResolvent::TauResolvent(Dimension dim, FundamentalSolution u1, FundamentalSolution v2)
    : dim_(dim), u1_(std::move(u1)), v2_(std::move(v2)) {
  const double lo = std::max({2.0, u1_.profile.grid.front(), v2_.profile.grid.front()});
  const double hi = std::min({12.0, u1_.profile.grid.back(), v2_.profile.grid.back()});
  C_ = wronskian_check(u1_, v2_, nullptr, lo, hi, 200).constant;
  if (C_ == 0) throw ParameterError("tau: degenerate fundamental pair");
}

RadialProfile TauResolvent::apply(const RadialProfile& f) const {
  const int d = dim_.d;
  const std::size_t n = f.grid.size();
  const auto& r = f.grid.nodes;
  if (r.front() < u1_.profile.grid.front() * (1 - 1e-12) ||
      r.front() < v2_.profile.grid.front() * (1 - 1e-12))
    throw DomainError("tau: f grid extends below the fundamental solutions");

  std::vector<double> u1v(n), u1d(n), u1dd(n), vv(n), vd(n), vdd(n);
  for (std::size_t i = 0; i < n; ++i) {
    u1v[i] = u1_.profile.value(r[i]);
    u1d[i] = u1_.profile.deriv(r[i]);
    u1dd[i] = u1_.profile.second_deriv(r[i]);
    vv[i] = v2_.profile.value(r[i]);
    vd[i] = v2_.profile.deriv(r[i]);
    vdd[i] = v2_.profile.second_deriv(r[i]);
  }
  auto w = [&](std::size_t i) { return std::pow(r[i], d + 3); };
  auto dw = [&](std::size_t i) { return (d + 3) * std::pow(r[i], d + 2); };

  // I2(r) = int_r^inf f v2 s^{d+3} ds. The tail beyond the grid models f as
  // the fitted power law and keeps v2's known asymptotic series exactly:
  //   g(s) = g(R) (s/R)^{q+1} S(s)/S(R),  S(s) = sum_j e_j s^{-2j}.
  std::vector<double> I2(n);
  {
    std::vector<double> g(n), dg(n);
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = f.values[i] * vv[i] * w(i);
      dg[i] = (f.derivs[i] * vv[i] + f.values[i] * vd[i]) * w(i) +
              f.values[i] * vv[i] * dw(i);
    }
    const double R = r[n - 1];
    double q, Bf;
    fit_power_pair(r, f.values, -4.0, q, Bf);
    if (q > -2.5)
      throw ParameterError("tau: f tail decays too slowly (fitted exponent " +
                           std::to_string(q) + ")");
    // (1 + Bf s^-2) S(s) = sum_m et_m s^-2m
    const auto e = v2_series_coeffs(dim_, 3);
    std::vector<double> et(e.size() + 1, 0.0);
    for (std::size_t j = 0; j < e.size(); ++j) {
      et[j] += e[j];
      et[j + 1] += Bf * e[j];
    }
    double SR = 0, tail = 0;
    for (std::size_t m = 0; m < et.size(); ++m) {
      SR += et[m] * std::pow(R, -2.0 * double(m));
      tail += et[m] * std::pow(R, 1.0 - 2.0 * double(m)) / (2.0 * double(m) - q - 2.0);
    }
    I2[n - 1] = g[n - 1] / SR * tail;
    for (std::size_t i = n - 1; i-- > 0;)
      I2[i] = I2[i + 1] +
              hermite_segment_integral(r[i], r[i + 1], g[i], g[i + 1], dg[i], dg[i + 1]);
  }

  // K(r) = int_r^inf f u1 s^{d+3} e^{(r^2-s^2)/4} ds, by backward recursion so
  // the exponential never exceeds 1. Segments are subdivided where the kernel
  // varies strongly (large r).
  std::vector<double> K(n);
  {
    auto gfun = [&](double s) {
      return f.value(s) * u1_.profile.value(s) * std::pow(s, d + 3);
    };
    auto dgfun = [&](double s) {
      return (f.deriv(s) * u1_.profile.value(s) + f.value(s) * u1_.profile.deriv(s)) *
                 std::pow(s, d + 3) +
             f.value(s) * u1_.profile.value(s) * (d + 3) * std::pow(s, d + 2);
    };
    const double R = r[n - 1];
    // Tail beyond the grid: extend the integrand by its local power law and
    // integrate under the kernel out to where e^{(R^2-s^2)/4} < 1e-7.
    {
      const double pk =
          fitted_tail_exponent(r[n - 2], gfun(r[n - 2]), R, gfun(R), -2.0);
      const double R_ext = std::sqrt(R * R + 4.0 * 16.0);
      auto gext = [&](double s) { return gfun(R) * std::pow(s / R, pk); };
      auto dgext = [&](double s) { return gfun(R) * pk * std::pow(s / R, pk - 1) / R; };
      const int n_sub = 28;
      double acc = 0, s0 = R;
      for (int k = 0; k < n_sub; ++k) {
        const double s1 = R + (R_ext - R) * (k + 1) / n_sub;
        const double f0 = std::exp((R * R - s0 * s0) / 4.0);
        const double f1 = std::exp((R * R - s1 * s1) / 4.0);
        acc += hermite_segment_integral(s0, s1, gext(s0) * f0, gext(s1) * f1,
                                        (dgext(s0) - 0.5 * s0 * gext(s0)) * f0,
                                        (dgext(s1) - 0.5 * s1 * gext(s1)) * f1);
        s0 = s1;
      }
      K[n - 1] = acc;
    }
    for (std::size_t i = n - 1; i-- > 0;) {
      const double a = r[i], b = r[i + 1];
      const double fac = std::exp((a * a - b * b) / 4.0);
      // h(s) = g(s) e^{(a^2-s^2)/4}: kernel max at the left endpoint
      const int n_sub = std::max(1, std::min(400, int((b * b - a * a) / (4.0 * 0.1)) + 1));
      double acc = 0;
      double s0 = a;
      for (int k = 0; k < n_sub; ++k) {
        const double s1 = k + 1 == n_sub ? b : a + (b - a) * (k + 1) / n_sub;
        const double f0 = std::exp((a * a - s0 * s0) / 4.0);
        const double f1 = std::exp((a * a - s1 * s1) / 4.0);
        acc += hermite_segment_integral(s0, s1, gfun(s0) * f0, gfun(s1) * f1,
                                        (dgfun(s0) - 0.5 * s0 * gfun(s0)) * f0,
                                        (dgfun(s1) - 0.5 * s1 * gfun(s1)) * f1);
        s0 = s1;
      }
      K[i] = fac * K[i + 1] + acc;
    }
  }

  std::vector<double> val(n), der(n), sec(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ri = r[i];
    const double u2d_f = vd[i] + 0.5 * ri * vv[i];
    const double u2dd_f = vdd[i] + ri * vd[i] + (0.5 + 0.25 * ri * ri) * vv[i];
    val[i] = (u1v[i] * I2[i] - vv[i] * K[i]) / C_;
    der[i] = (u1d[i] * I2[i] - u2d_f * K[i]) / C_;
    sec[i] = (u1dd[i] * I2[i] - u2dd_f * K[i]) / C_ - f.values[i];
  }
  return RadialProfile(f.grid, std::move(val), std::move(der), std::move(sec));
}

RadialProfile PsiResolvent::apply(const RadialProfile& f) const {
  const int d = dim_.d;
  const double sg = dim_.sigma(), om = dim_.omega();
  const std::size_t n = f.grid.size();
  const auto& r = f.grid.nodes;

  std::vector<double> lg(n), snv(n), csv(n), rp(n);
  for (std::size_t i = 0; i < n; ++i) {
    lg[i] = std::log(r[i]);
    snv[i] = std::sin(om * lg[i]);
    csv[i] = std::cos(om * lg[i]);
    rp[i] = std::pow(r[i], sg);
  }
  // phi1 = sin/r^sg, phi2 = cos/r^sg; integrand weights f phi s^{d+3}.
  auto phi = [&](std::size_t i, bool sine) { return (sine ? snv[i] : csv[i]) / rp[i]; };
  auto dphi = [&](std::size_t i, bool sine) {
    const double t = sine ? snv[i] : csv[i];
    const double t2 = sine ? csv[i] : -snv[i];
    return (-sg * t + om * t2) / (rp[i] * r[i]);
  };
  auto d2phi = [&](std::size_t i, bool sine) {
    const double t = sine ? snv[i] : csv[i];
    const double t2 = sine ? csv[i] : -snv[i];
    return ((sg * sg + sg - om * om) * t - (2 * sg + 1) * om * t2) / (rp[i] * r[i] * r[i]);
  };

  // Tail model beyond the grid: f ~ c_f s^q (fitted), so
  // int_R^inf f phi s^{d+3} ds = c_f (Re/Im)[-R^{eta+1+i om}/(eta+1+i om)],
  // eta = q + d + 3 - sg.
  const double R = r[n - 1];
  const double q = fitted_tail_exponent(r[n - 2], f.values[n - 2], R, f.values[n - 1], -6.0);
  const double eta = q + (d + 3) - sg;
  if (eta + 1 >= 0)
    throw ParameterError("psi: integrand tail decays too slowly (fitted f exponent " +
                         std::to_string(q) + ")");
  const double cf = f.values[n - 1] / std::pow(R, q);
  const std::complex<double> z(eta + 1, om);
  const std::complex<double> tc =
      -std::pow(R, eta + 1) * std::exp(std::complex<double>(0, om * std::log(R))) / z;
  const double tail_sin = cf * tc.imag();
  const double tail_cos = cf * tc.real();

  std::vector<double> I1(n), I2(n);
  auto g = [&](std::size_t i, bool sine) {
    return f.values[i] * phi(i, sine) * std::pow(r[i], d + 3);
  };
  auto dg = [&](std::size_t i, bool sine) {
    return (f.derivs[i] * phi(i, sine) + f.values[i] * dphi(i, sine)) * std::pow(r[i], d + 3) +
           f.values[i] * phi(i, sine) * (d + 3) * std::pow(r[i], d + 2);
  };
  I1[n - 1] = tail_sin;
  I2[n - 1] = tail_cos;
  for (std::size_t i = n - 1; i-- > 0;) {
    I1[i] = I1[i + 1] + hermite_segment_integral(r[i], r[i + 1], g(i, true), g(i + 1, true),
                                                 dg(i, true), dg(i + 1, true));
    I2[i] = I2[i + 1] + hermite_segment_integral(r[i], r[i + 1], g(i, false), g(i + 1, false),
                                                 dg(i, false), dg(i + 1, false));
  }

  std::vector<double> val(n), der(n), sec(n);
  for (std::size_t i = 0; i < n; ++i) {
    val[i] = (phi(i, true) * I2[i] - phi(i, false) * I1[i]) / om;
    der[i] = (dphi(i, true) * I2[i] - dphi(i, false) * I1[i]) / om;
    sec[i] = (d2phi(i, true) * I2[i] - d2phi(i, false) * I1[i]) / om - f.values[i];
  }
  return RadialProfile(f.grid, std::move(val), std::move(der), std::move(sec));
}

SResolvent::SResolvent(const SteadyPair& steady, FundamentalSolution lambda_qbar,
                       FundamentalSolution rho)
    : steady_(steady), lam_(std::move(lambda_qbar)), rho_(std::move(rho)) {
  const double lo = std::max(rho_.profile.grid.front() * 20, 0.02);
  const double hi = std::min(1.0, rho_.profile.grid.back());
  C_ = wronskian_check(lam_, rho_, &steady_, lo, hi, 200).constant;
  if (C_ == 0) throw ParameterError("S: degenerate fundamental pair");
}

RadialProfile SResolvent::apply(const RadialProfile& f) const {
  const int d = steady_.dim.d;
  const std::size_t n = f.grid.size();
  const auto& r = f.grid.nodes;
  if (r.back() > rho_.profile.grid.back() * (1 + 1e-12))
    throw DomainError("S: f grid extends beyond rho's domain");

  std::vector<double> lv(n), ld(n), ldd(n), rv(n), rd(n), rdd(n), E(n), qb(n);
  for (std::size_t i = 0; i < n; ++i) {
    lv[i] = lam_.profile.value(r[i]);
    ld[i] = lam_.profile.deriv(r[i]);
    ldd[i] = lam_.profile.second_deriv(r[i]);
    rv[i] = rho_.profile.value(r[i]);
    rd[i] = rho_.profile.deriv(r[i]);
    rdd[i] = rho_.profile.second_deriv(r[i]);
    E[i] = steady_.weight_exp(r[i]);
    qb[i] = steady_.Qbar.value(r[i]);
  }
  auto w = [&](std::size_t i) { return std::pow(r[i], d + 1); };
  auto build = [&](const std::vector<double>& hv, const std::vector<double>& hd) {
    // forward prefix of f * h * E * s^{d+1} with power-law closure on [0, r0]
    std::vector<double> J(n);
    auto g = [&](std::size_t i) { return f.values[i] * hv[i] * E[i] * w(i); };
    auto dg = [&](std::size_t i) {
      const double inner = f.derivs[i] * hv[i] + f.values[i] * hd[i] +
                           f.values[i] * hv[i] * 2 * r[i] * qb[i];
      return inner * E[i] * w(i) + f.values[i] * hv[i] * E[i] * (d + 1) * std::pow(r[i], d);
    };
    const double g0 = g(0), g1 = g(1);
    double qexp = 0;
    if (g0 != 0 && g1 != 0 && (g0 > 0) == (g1 > 0))
      qexp = std::log(std::abs(g1 / g0)) / std::log(r[1] / r[0]);
    if (qexp + 1 <= 0) throw DomainError("S: non-integrable integrand at the origin");
    J[0] = g0 * r[0] / (qexp + 1);
    for (std::size_t i = 1; i < n; ++i)
      J[i] = J[i - 1] + hermite_segment_integral(r[i - 1], r[i], g(i - 1), g(i), dg(i - 1), dg(i));
    return J;
  };
  const std::vector<double> Jl = build(lv, ld);
  const std::vector<double> Jr = build(rv, rd);

  std::vector<double> val(n), der(n), sec(n);
  for (std::size_t i = 0; i < n; ++i) {
    val[i] = (rv[i] * Jl[i] - lv[i] * Jr[i]) / C_;
    der[i] = (rd[i] * Jl[i] - ld[i] * Jr[i]) / C_;
    sec[i] = (rdd[i] * Jl[i] - ldd[i] * Jr[i]) / C_ - f.values[i];
  }
  return RadialProfile(f.grid, std::move(val), std::move(der), std::move(sec));
}

// --- weighted norms ----------------------------------------------------------

double weighted_norm(const NormSpec& spec, const RadialProfile& w) {
  const double sg = spec.dim.sigma();
  double out = 0;
  if (spec.tag == NormSpec::Tag::X_r0) {
    const double r0 = spec.param;
    if (w.grid.front() > r0 * (1 + 1e-9) || w.grid.back() < 1.0)
      throw DomainError("X norm: grid must cover [r0, 1] and beyond");
    double inner = 0, outer = 0;
    for (std::size_t i = 0; i < w.grid.size(); ++i) {
      const double r = w.grid.nodes[i];
      if (r < r0 * (1 - 1e-12)) continue;
      if (r <= 1.0)
        inner = std::max(inner, std::pow(r, sg) * std::abs(w.values[i]) +
                                    std::pow(r, sg + 1) * std::abs(w.derivs[i]));
      if (r >= 1.0)
        outer = std::max(outer, std::pow(r, 4) * std::abs(w.values[i]) +
                                    std::pow(r, 5) * std::abs(w.derivs[i]));
    }
    out = inner + outer;
  } else {
    const double r1 = spec.param;
    if (w.grid.back() < r1 * (1 - 1e-9)) throw DomainError("Y norm: grid must cover [0, r1]");
    for (std::size_t i = 0; i < w.grid.size(); ++i) {
      const double r = w.grid.nodes[i];
      if (r > r1 * (1 + 1e-12)) continue;
      out = std::max(out, (std::abs(w.values[i]) + std::abs(r * w.derivs[i])) /
                              std::sqrt(1 + r));
    }
  }
  return out;
}

}  // namespace ks
