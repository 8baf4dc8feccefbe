#include "ks/quadrature.hpp"

#include <cmath>

namespace ks {

double fitted_tail_exponent(double r1, double g1, double r2, double g2, double fallback) {
  if (g1 == 0 || g2 == 0 || (g1 > 0) != (g2 > 0)) return fallback;
  return std::log(std::abs(g2) / std::abs(g1)) / std::log(r2 / r1);
}

double origin_closure(const RadialProfile& f, int m) {
  const double r0 = f.grid.nodes[0], r1 = f.grid.nodes[1];
  const double f0 = f.values[0], f1 = f.values[1];
  if (f0 == 0 && f1 == 0) return 0;
  double q;
  if (f0 == 0 || f1 == 0 || (f0 > 0) != (f1 > 0)) {
    q = 0;  // no clean power law; treat f as locally constant
  } else {
    q = std::log(std::abs(f1) / std::abs(f0)) / std::log(r1 / r0);
  }
  const double p = q + m;
  if (p <= -1.0)
    throw DomainError("cumulative_integral: non-integrable singularity at the origin "
                      "(fitted exponent " + std::to_string(q) + ", weight m=" +
                      std::to_string(m) + ")");
  // \int_0^{r0} f0 (s/r0)^q s^m ds = f0 r0^{m+1} / (q+m+1)
  return f0 * std::pow(r0, m + 1) / (p + 1.0);
}

RadialProfile cumulative_integral(const RadialProfile& f, int m) {
  f.validate();
  const std::size_t n = f.grid.size();
  std::vector<double> F(n), dF(n);

  auto g = [&](std::size_t i) { return f.values[i] * std::pow(f.grid.nodes[i], m); };
  auto dg = [&](std::size_t i) {
    const double r = f.grid.nodes[i];
    return f.derivs[i] * std::pow(r, m) + m * f.values[i] * std::pow(r, m - 1);
  };

  F[0] = origin_closure(f, m);
  dF[0] = g(0);
  for (std::size_t i = 1; i < n; ++i) {
    F[i] = F[i - 1] + hermite_segment_integral(f.grid.nodes[i - 1], f.grid.nodes[i],
                                               g(i - 1), g(i), dg(i - 1), dg(i));
    dF[i] = g(i);
  }
  return RadialProfile(f.grid, std::move(F), std::move(dF));
}

}  // namespace ks
