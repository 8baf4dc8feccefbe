#include "ks/ivp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ks {

void IvpSpec::validate() const {
  if (!rhs) throw ParameterError("ivp: missing right-hand side");
  if (y0.empty()) throw ParameterError("ivp: empty initial state");
  if (!(rtol > 0) || !(atol > 0)) throw ParameterError("ivp: tolerances must be positive");
  if (r_start == r_end) throw ParameterError("ivp: zero integration interval");
  if (!std::isfinite(r_start) || !std::isfinite(r_end))
    throw ParameterError("ivp: non-finite interval");
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// y5 - y4 error weights (k7 = f at the new point, FSAL).
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

Trajectory integrate_ivp(const IvpSpec& spec) {
  spec.validate();
  const std::size_t n = spec.y0.size();
  const double dir = spec.r_end > spec.r_start ? 1.0 : -1.0;
  const double span = std::abs(spec.r_end - spec.r_start);

  std::vector<double> y = spec.y0, ynew(n), yerr(n), ytmp(n);
  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);

  auto call = [&](double r, const std::vector<double>& yy, std::vector<double>& out) {
    spec.rhs(r, std::span<const double>(yy), std::span<double>(out));
    for (double v : out)
      if (!std::isfinite(v)) throw IntegrationError("ivp: non-finite right-hand side", r);
  };

  double r = spec.r_start;
  call(r, y, k1);

  // Initial step: conservative fraction of the span, limited by |y|/|y'|.
  double h = spec.initial_step > 0 ? spec.initial_step : span / 100.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double scale = spec.atol + spec.rtol * std::abs(y[i]);
    if (std::abs(k1[i]) > 0) h = std::min(h, 0.1 * (std::abs(y[i]) + scale) / std::abs(k1[i]));
  }
  h = std::max(h, span * 1e-12);

  Trajectory traj;
  traj.diag.min_step = std::numeric_limits<double>::infinity();
  traj.nodes.push_back({r, y, k1});

  double err_prev = 1.0;
  for (long step = 0; step < spec.max_steps; ++step) {
    const double remaining = std::abs(spec.r_end - r);
    if (remaining <= 0) break;
    bool last = false;
    if (h >= remaining) {
      h = remaining;
      last = true;
    }
    const double hd = dir * h;

    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + hd * a21 * k1[i];
    call(r + c2 * hd, ytmp, k2);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + hd * (a31 * k1[i] + a32 * k2[i]);
    call(r + c3 * hd, ytmp, k3);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + hd * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    call(r + c4 * hd, ytmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + hd * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    call(r + c5 * hd, ytmp, k5);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + hd * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    call(r + hd, ytmp, k6);
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + hd * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    const double rnew = last ? spec.r_end : r + hd;
    call(rnew, ynew, k7);

    double err = 0;
    for (std::size_t i = 0; i < n; ++i) {
      yerr[i] = hd * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double scale =
          spec.atol + spec.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      const double q = yerr[i] / scale;
      err += q * q;
    }
    err = std::sqrt(err / double(n));

    if (err <= 1.0) {
      r = rnew;
      y = ynew;
      k1 = k7;  // FSAL
      traj.nodes.push_back({r, y, k1});
      ++traj.diag.n_accepted;
      traj.diag.min_step = std::min(traj.diag.min_step, h);
      traj.diag.max_step = std::max(traj.diag.max_step, h);
      if (last || std::abs(spec.r_end - r) <= 0) {
        return traj;
      }
      // PI controller (Hairer): grow on small err, damped by the previous error.
      double fac = 0.9 * std::pow(err > 0 ? err : 1e-16, -0.7 / 5.0) *
                   std::pow(err_prev, 0.4 / 5.0);
      fac = std::clamp(fac, 0.2, 6.0);
      h *= fac;
      err_prev = std::max(err, 1e-16);
    } else {
      ++traj.diag.n_rejected;
      h *= std::max(0.2, 0.9 * std::pow(err, -0.25));
    }
    if (h < std::abs(r) * 1e-15 + 1e-300)
      throw IntegrationError("ivp: step-size underflow", r);
  }
  throw IntegrationError("ivp: max step count exceeded", r);
}

std::size_t Trajectory::segment(double r) const {
  const bool fwd = nodes.back().r >= nodes.front().r;
  std::size_t lo = 0, hi = nodes.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (fwd ? (nodes[mid].r <= r) : (nodes[mid].r >= r))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

double Trajectory::eval(std::size_t comp, double r) const {
  const std::size_t i = segment(r);
  const auto& a = nodes[i];
  const auto& b = nodes[i + 1];
  const double h = b.r - a.r, t = (r - a.r) / h, t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * a.y[comp] + (t3 - 2 * t2 + t) * h * a.dy[comp] +
         (-2 * t3 + 3 * t2) * b.y[comp] + (t3 - t2) * h * b.dy[comp];
}

double Trajectory::eval_deriv(std::size_t comp, double r) const {
  const std::size_t i = segment(r);
  const auto& a = nodes[i];
  const auto& b = nodes[i + 1];
  const double h = b.r - a.r, t = (r - a.r) / h, t2 = t * t;
  return ((6 * t2 - 6 * t) * a.y[comp] + (3 * t2 - 4 * t + 1) * h * a.dy[comp] +
          (-6 * t2 + 6 * t) * b.y[comp] + (3 * t2 - 2 * t) * h * b.dy[comp]) / h;
}

RadialProfile Trajectory::sample(
    std::size_t comp, const RadialGrid& grid,
    const std::function<double(double, std::span<const double>)>& second_from_rhs) const {
  std::vector<double> v(grid.size()), dv(grid.size()), d2;
  std::vector<double> state(dim());
  if (second_from_rhs) d2.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid.nodes[i];
    v[i] = eval(comp, r);
    for (std::size_t c = 0; c < dim(); ++c) state[c] = eval(c, r);
    dv[i] = eval_deriv(comp, r);
    if (second_from_rhs) d2[i] = second_from_rhs(r, std::span<const double>(state));
  }
  return RadialProfile(grid, std::move(v), std::move(dv), std::move(d2));
}

RadialProfile Trajectory::sample_pair(
    std::size_t comp_value, std::size_t comp_deriv, const RadialGrid& grid,
    const std::function<double(double, std::span<const double>)>& second_from_rhs) const {
  std::vector<double> v(grid.size()), dv(grid.size()), d2;
  std::vector<double> state(dim());
  if (second_from_rhs) d2.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid.nodes[i];
    v[i] = eval(comp_value, r);
    dv[i] = eval(comp_deriv, r);
    if (second_from_rhs) {
      for (std::size_t c = 0; c < dim(); ++c) state[c] = eval(c, r);
      d2[i] = second_from_rhs(r, std::span<const double>(state));
    }
  }
  return RadialProfile(grid, std::move(v), std::move(dv), std::move(d2));
}

}  // namespace ks
