#pragma once

#include <cstddef>
#include <vector>

#include "ks/errors.hpp"

namespace ks {

enum class Grading {
  log_log,        // log-uniform on [r_min,1] and on [1,r_max], node 1 shared
  log_uniform,    // single log-uniform band
  core_log_tail,  // uniform near the origin, log-graded tail (MOL grids)
  custom,
};

struct RadialGrid {
  std::vector<double> nodes;  // strictly increasing, >= 2 entries
  double r_min = 0;
  double r_max = 0;
  Grading grading = Grading::custom;

  std::size_t size() const { return nodes.size(); }
  double front() const { return nodes.front(); }
  double back() const { return nodes.back(); }

  // Index i with nodes[i] <= r <= nodes[i+1] (clamped to the end segments).
  std::size_t segment(double r) const;

  void validate() const;
};

// Log-uniform on [r_min,1] with n_inner nodes and on [1,r_max] with n_outer
// nodes, the node at 1.0 shared. Requires 0 < r_min < 1 < r_max, counts >= 2.
RadialGrid make_graded_grid(double r_min, double r_max, int n_inner, int n_outer);

// Plain log-uniform grid with n nodes on [a,b], 0 < a < b.
RadialGrid make_log_grid(double a, double b, int n);

// Uniform spacing h on [h, r_core], then log-graded out to r_max with
// n_tail nodes. Used by the PDE simulator where the CFL limit forbids
// log-refinement toward the origin.
RadialGrid make_core_tail_grid(double h, double r_core, double r_max, int n_tail);

// A radial function sampled on a grid with first derivatives; dense C^1
// evaluation by cubic Hermite interpolation. `second` is optional extra data
// (analytic second derivatives, usually from an ODE right-hand side); when
// present it is used for second_deriv and for deriv between nodes.
struct RadialProfile {
  RadialGrid grid;
  std::vector<double> values;
  std::vector<double> derivs;
  std::vector<double> second;

  RadialProfile() = default;
  RadialProfile(RadialGrid g, std::vector<double> v, std::vector<double> dv,
                std::vector<double> d2 = {});

  bool has_second() const { return !second.empty(); }

  double value(double r) const;
  double deriv(double r) const;
  // From `second` when stored, else d^2/dr^2 of the value interpolant
  // (one order of accuracy lost).
  double second_deriv(double r) const;

  void validate() const;
};

// Builds a profile by sampling closed forms f, f' (and optionally f'') on a grid.
template <class F, class dF>
RadialProfile sample_profile(const RadialGrid& g, F f, dF df) {
  std::vector<double> v(g.size()), dv(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    v[i] = f(g.nodes[i]);
    dv[i] = df(g.nodes[i]);
  }
  return RadialProfile(g, std::move(v), std::move(dv));
}

template <class F, class dF, class d2F>
RadialProfile sample_profile(const RadialGrid& g, F f, dF df, d2F d2f) {
  RadialProfile p = sample_profile(g, f, df);
  p.second.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) p.second[i] = d2f(g.nodes[i]);
  return p;
}

}  // namespace ks
