#pragma once

#include <vector>

#include "ks/dimension.hpp"
#include "ks/matching.hpp"
#include "ks/radial.hpp"

namespace ks {

// Exact backward self-similar blow-up solution u(x,t) = U_n(x/sqrt(T-t))/(T-t).
struct BlowupSolution {
  const SelfSimilarProfile* profile;  // not owned
  double T;
  double tail_A = 0;  // U(y) ~ A/y^2 + B/y^4 beyond the profile grid
  double tail_B = 0;

  // Pointwise evaluation; throws DomainError for t >= T.
  double eval(double x, double t) const;
  // The t->T pointwise limit from the tail representation, u*(x) = A/x^2.
  double u_star(double x) const;
  // sup_x u(.,t) evaluated over the mapped profile nodes.
  double sup_u(double t) const;
};

BlowupSolution make_blowup(const SelfSimilarProfile& profile, double T);

// ||u(.,t) - u*||_{L^p}^ (full measure, radial quadrature over [r_lo, r_hi]).
// Requires 1 <= p < d/2.
double lp_distance(const BlowupSolution& sol, double t, double p, double r_lo = 1e-4,
                   double r_hi = 20.0, int n_quad = 6000);

struct PdeState {
  RadialGrid grid;
  std::vector<double> u;  // cell values, >= 0
  double t = 0;
  Dimension dim;
  double inner_mass = 0;  // frozen mass of the truncated region [0, r_min]
};

struct MolResult {
  std::vector<PdeState> snapshots;  // at the requested times (plus the final state)
  double mass0 = 0;
  double mass_drift_rel = 0;  // |M(t) - M(0) - boundary flux - clip correction| / M(0)
  long n_steps = 0;
  bool completed = true;  // false when dt underflowed before t_end
};

// Conservative finite-volume method of lines for the radial system
//   u_t = (1/r^{d-1}) d_r [ r^{d-1} (u_r + u m / r^{d-1}) ],  m = int_0^r u s^{d-1} ds,
// on [r_min, r_max] with a zero-flux Neumann condition at the inner face
// (the collapsing core below r_min is not simulated; its mass enters m as
// the frozen inner_mass) and far-field d(log u)/d(log r) = -2 at r_max.
// SSP-RK3 with CFL-limited adaptive dt; the drift term uses the logarithmic
// mean so the discrete flux vanishes on zero-flux (steady) data.
MolResult mol_simulate(const PdeState& u0, double t_end,
                       const std::vector<double>& snapshot_times, double cfl = 0.4);

// Initial data u0(x) = U_n(x/sqrt(T))/T sampled on a simulation grid.
PdeState sample_initial_state(const BlowupSolution& sol, const RadialGrid& grid);

// Simulation grid: log-uniform faces on [r_min, r_max], cell-centered nodes,
// inner face exactly at r_min.
RadialGrid make_sim_grid(int n_nodes, double r_max, double r_min = 0.06);

}  // namespace ks
