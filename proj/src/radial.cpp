#include "ks/radial.hpp"

#include <algorithm>
#include <cmath>

namespace ks {

void RadialGrid::validate() const {
  if (nodes.size() < 2) throw ParameterError("grid needs at least 2 nodes");
  for (std::size_t i = 1; i < nodes.size(); ++i)
    if (!(nodes[i] > nodes[i - 1])) throw ParameterError("grid nodes not strictly increasing");
  if (r_min > nodes.front() || nodes.back() > r_max)
    throw ParameterError("grid nodes outside [r_min, r_max]");
}

std::size_t RadialGrid::segment(double r) const {
  if (r <= nodes.front()) return 0;
  if (r >= nodes.back()) return nodes.size() - 2;
  auto it = std::upper_bound(nodes.begin(), nodes.end(), r);
  return static_cast<std::size_t>(it - nodes.begin()) - 1;
}

static void append_log_nodes(std::vector<double>& out, double a, double b, int n,
                             bool skip_first) {
  const double la = std::log(a), lb = std::log(b);
  for (int i = skip_first ? 1 : 0; i < n; ++i) {
    double t = double(i) / double(n - 1);
    // endpoints exact, interior log-uniform
    out.push_back(i == 0 ? a : i == n - 1 ? b : std::exp(la + t * (lb - la)));
  }
}

RadialGrid make_graded_grid(double r_min, double r_max, int n_inner, int n_outer) {
  if (!(0 < r_min && r_min < 1 && 1 < r_max))
    throw ParameterError("make_graded_grid requires 0 < r_min < 1 < r_max");
  if (n_inner < 2 || n_outer < 2) throw ParameterError("node counts must be >= 2");
  RadialGrid g;
  g.nodes.reserve(std::size_t(n_inner + n_outer - 1));
  append_log_nodes(g.nodes, r_min, 1.0, n_inner, false);
  append_log_nodes(g.nodes, 1.0, r_max, n_outer, true);  // node 1 shared
  g.r_min = r_min;
  g.r_max = r_max;
  g.grading = Grading::log_log;
  g.validate();
  return g;
}

RadialGrid make_log_grid(double a, double b, int n) {
  if (!(0 < a && a < b)) throw ParameterError("make_log_grid requires 0 < a < b");
  if (n < 2) throw ParameterError("node count must be >= 2");
  RadialGrid g;
  g.nodes.reserve(std::size_t(n));
  append_log_nodes(g.nodes, a, b, n, false);
  g.r_min = a;
  g.r_max = b;
  g.grading = Grading::log_uniform;
  g.validate();
  return g;
}

RadialGrid make_core_tail_grid(double h, double r_core, double r_max, int n_tail) {
  if (!(0 < h && h < r_core && r_core < r_max))
    throw ParameterError("make_core_tail_grid requires 0 < h < r_core < r_max");
  if (n_tail < 2) throw ParameterError("tail node count must be >= 2");
  RadialGrid g;
  const int n_core = int(std::floor(r_core / h + 0.5));
  for (int i = 1; i <= n_core; ++i) g.nodes.push_back(i * h);
  append_log_nodes(g.nodes, g.nodes.back(), r_max, n_tail + 1, true);
  g.r_min = g.nodes.front();
  g.r_max = r_max;
  g.grading = Grading::core_log_tail;
  g.validate();
  return g;
}

RadialProfile::RadialProfile(RadialGrid g, std::vector<double> v, std::vector<double> dv,
                             std::vector<double> d2)
    : grid(std::move(g)), values(std::move(v)), derivs(std::move(dv)), second(std::move(d2)) {
  validate();
}

void RadialProfile::validate() const {
  grid.validate();
  if (values.size() != grid.size() || derivs.size() != grid.size())
    throw ParameterError("profile arrays must match grid size");
  if (!second.empty() && second.size() != grid.size())
    throw ParameterError("second-derivative array must match grid size");
}

namespace {

// Cubic Hermite on [x0,x1] with values y and slopes m, evaluated at x.
struct Hermite {
  double h, t;
  double y0, y1, m0, m1;
  Hermite(double x0, double x1, double x, double v0, double v1, double s0, double s1)
      : h(x1 - x0), t((x - x0) / (x1 - x0)), y0(v0), y1(v1), m0(s0), m1(s1) {}
  double value() const {
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * m0 +
           (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * m1;
  }
  double deriv() const {
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * h * m0 +
            (-6 * t2 + 6 * t) * y1 + (3 * t2 - 2 * t) * h * m1) / h;
  }
  double deriv2() const {
    return ((12 * t - 6) * y0 + (6 * t - 4) * h * m0 + (-12 * t + 6) * y1 +
            (6 * t - 2) * h * m1) / (h * h);
  }
};

}  // namespace

double RadialProfile::value(double r) const {
  const std::size_t i = grid.segment(r);
  return Hermite(grid.nodes[i], grid.nodes[i + 1], r, values[i], values[i + 1], derivs[i],
                 derivs[i + 1]).value();
}

double RadialProfile::deriv(double r) const {
  const std::size_t i = grid.segment(r);
  if (has_second())
    return Hermite(grid.nodes[i], grid.nodes[i + 1], r, derivs[i], derivs[i + 1], second[i],
                   second[i + 1]).value();
  return Hermite(grid.nodes[i], grid.nodes[i + 1], r, values[i], values[i + 1], derivs[i],
                 derivs[i + 1]).deriv();
}

double RadialProfile::second_deriv(double r) const {
  const std::size_t i = grid.segment(r);
  if (has_second())
    return Hermite(grid.nodes[i], grid.nodes[i + 1], r, derivs[i], derivs[i + 1], second[i],
                   second[i + 1]).deriv();
  return Hermite(grid.nodes[i], grid.nodes[i + 1], r, values[i], values[i + 1], derivs[i],
                 derivs[i + 1]).deriv2();
}

}  // namespace ks
