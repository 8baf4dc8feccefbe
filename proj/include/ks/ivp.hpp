#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ks/errors.hpp"
#include "ks/radial.hpp"

namespace ks {

using Rhs = std::function<void(double r, std::span<const double> y, std::span<double> dy)>;

struct IvpSpec {
  Rhs rhs;
  double r_start = 0;
  double r_end = 0;  // direction is sign(r_end - r_start)
  std::vector<double> y0;
  double rtol = 1e-11;
  double atol = 1e-14;
  long max_steps = 4'000'000;
  double initial_step = 0;  // 0 = auto

  void validate() const;
};

struct IvpDiagnostics {
  long n_accepted = 0;
  long n_rejected = 0;
  double min_step = 0;
  double max_step = 0;
};

// One accepted step endpoint: state and its derivative.
struct IvpNode {
  double r;
  std::vector<double> y;
  std::vector<double> dy;
};

// Dormand-Prince trajectory with dense output by cubic Hermite between
// accepted steps. Deterministic: identical spec -> bit-identical result.
struct Trajectory {
  std::vector<IvpNode> nodes;  // ordered in integration direction
  IvpDiagnostics diag;

  std::size_t dim() const { return nodes.empty() ? 0 : nodes.front().y.size(); }
  double r_first() const { return nodes.front().r; }
  double r_last() const { return nodes.back().r; }

  double eval(std::size_t comp, double r) const;
  double eval_deriv(std::size_t comp, double r) const;

  // Samples component `comp` onto `grid`, carrying the interpolant derivative;
  // if `second_from_rhs` is set it is called per node to fill analytic y''.
  RadialProfile sample(std::size_t comp, const RadialGrid& grid,
                       const std::function<double(double, std::span<const double>)>&
                           second_from_rhs = nullptr) const;

  // For second-order systems integrated as (u, u'): value from comp_value,
  // derivative from comp_deriv (full interpolation order on both).
  RadialProfile sample_pair(std::size_t comp_value, std::size_t comp_deriv,
                            const RadialGrid& grid,
                            const std::function<double(double, std::span<const double>)>&
                                second_from_rhs = nullptr) const;

 private:
  std::size_t segment(double r) const;
};

// Adaptive embedded Runge-Kutta 5(4) (Dormand-Prince) with PI step control.
// Throws IntegrationError on step-size underflow or step budget exhaustion.
Trajectory integrate_ivp(const IvpSpec& spec);

}  // namespace ks
