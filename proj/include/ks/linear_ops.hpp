#pragma once

#include <vector>

#include "ks/dimension.hpp"
#include "ks/radial.hpp"
#include "ks/steady.hpp"

namespace ks {

// The three linearizations, written as Op(u) = -u'' + beta(r) u' + gamma(r) u:
//   L     = -Lap_{d+2} + Lam/2 - 2 y.grad(Phi_* .) - 4d Phi_*   (around Phi_*, self-similar)
//   Hinf  = -Lap_{d+2}         - 2 r d_r(Phi_* .) - 4d Phi_*    (around Phi_*, steady)
//   H     = -Lap_{d+2}         - 2 r d_r(Qbar  .) - 4d Qbar     (around Qbar, steady)
enum class OperatorTag { L, Hinf, H };

struct OperatorKind {
  OperatorTag tag;
  Dimension dim;
  const SteadyPair* steady = nullptr;  // required for H

  double beta(double r) const;
  double gamma(double r) const;
};

// Pointwise residual profile Op(u); u needs derivative data, second
// derivatives come from u.second when stored, else from the interpolant.
RadialProfile apply_operator(const OperatorKind& kind, const RadialProfile& u);

// sup over nodes in [r_lo, r_hi] of |Op(u)| / (|u''| + |beta u'| + |gamma u| + extra_scale).
double operator_residual_sup(const OperatorKind& kind, const RadialProfile& u, double r_lo,
                             double r_hi, double extra_scale = 0);

// --- asymptotic series -------------------------------------------------------

// u1 = r^-2 (1 + c2 r^-2 + c4 r^-4 + ...): coefficients of the algebraically
// decaying L-solution; c_{2k} fixed order by order by the Lam/2 term
// (c2 = 4 - 2d, so -2 for d=3).
std::vector<double> u1_series_coeffs(Dimension dim, int k_max);

// v2 = r^-(d+2) (1 + e2 r^-2 + ...): series of the factored second solution,
// u2 = e^{r^2/4} v2.
std::vector<double> v2_series_coeffs(Dimension dim, int j_max);

void u1_series_eval(Dimension dim, double r, double& val, double& der);
void v2_series_eval(Dimension dim, double r, double& val, double& der);

// --- fundamental solutions ---------------------------------------------------

enum class FundKind { u1, u2_factored, phi1, phi2, LambdaQbar, rho };

struct FundamentalSolution {
  FundKind kind;
  Dimension dim;
  RadialProfile profile;  // for u2_factored this stores v2
  double seed_radius = 0;
};

// Backward integration of L(u) = 0 from R with the asymptotic series seed;
// normalized so r^2 u1 -> 1. Requires R >= 30.
FundamentalSolution fundamental_u1(Dimension dim, double r_lo, double R, double tol = 1e-13,
                                   int n_inner_per_decade = 800, int n_outer_per_decade = 400);

// Factored second solution v2 (u2 = e^{r^2/4} v2). Built by reduction of
// order from u1 on [r_join, R] (the exponential kernel keeps every factor
// <= 1, and u1 has no zeros there), then by backward integration of the
// v-equation below r_join, where v2 itself is the backward-growing mode.
// Direct integration from R is impossible: the u1 e^{-r^2/4} mode grows by
// e^{(R^2-r^2)/4} backward and destroys the subdominant solution.
FundamentalSolution fundamental_v2(Dimension dim, const FundamentalSolution& u1, double r_lo,
                                   double R, double tol = 1e-13);

// Closed forms sin/cos(omega_d log r) / r^{(d+2)/2}.
FundamentalSolution fundamental_phi(Dimension dim, bool sine, double r_lo, double r_hi,
                                    int n_per_decade = 400);

// Scaling mode 2 Qbar + r Qbar' of the steady equation (H kernel).
FundamentalSolution fundamental_lambda_qbar(const SteadyPair& steady);

// Singular H-kernel element, ~ r^-d at the origin; seeded from the
// reduction-of-order expansion near 0 (valid where LambdaQbar is bounded away
// from zero) and normalized so the weighted Wronskian with LambdaQbar is 1.
FundamentalSolution fundamental_rho(const SteadyPair& steady, double r_lo = 1e-4,
                                    double r_hi = 0, double tol = 1e-12);

// --- Wronskians --------------------------------------------------------------

// Weighted Wronskian, constant for an exact pair:
//   (u1,u2):            r^{d+3} e^{-r^2/4} (u1' u2 - u2' u1)   [factored form]
//   (phi1,phi2):        r^{d+3} (phi1' phi2 - phi2' phi1) = omega_d
//   (LambdaQbar, rho):  r^{d+1} e^{intW} (LambdaQbar' rho - rho' LambdaQbar)
struct WronskianReport {
  double constant = 0;     // median over the window
  double max_rel_dev = 0;  // max |w - constant| / |constant|
  double r_lo = 0, r_hi = 0;
};

WronskianReport wronskian_check(const FundamentalSolution& a, const FundamentalSolution& b,
                                const SteadyPair* steady, double r_lo, double r_hi,
                                int n_samples = 400);

// --- resolvents --------------------------------------------------------------

// tau(f) = [ u1 int_r^inf f u2 s^{d+3} e^{-s^2/4} ds
//          - u2 int_r^inf f u1 s^{d+3} e^{-s^2/4} ds ] / C,   L(tau f) = f.
// The u2 term is evaluated in factored form with e^{(r^2-s^2)/4} kept inside
// the quadrature; C is the measured Wronskian constant.
class TauResolvent {
 public:
  TauResolvent(Dimension dim, FundamentalSolution u1, FundamentalSolution v2);

  // f on a grid inside the fundamental solutions' domain; returns tau(f) on
  // f's grid with analytic derivative and second-derivative data.
  RadialProfile apply(const RadialProfile& f) const;

  double wronskian_constant() const { return C_; }
  const FundamentalSolution& u1() const { return u1_; }
  const FundamentalSolution& v2() const { return v2_; }

 private:
  Dimension dim_;
  FundamentalSolution u1_, v2_;
  double C_;
};

// psi(f) = [ phi1 int_r^inf f phi2 s^{d+3} ds - phi2 int_r^inf f phi1 s^{d+3} ds ] / omega_d,
// Hinf(psi f) = f. Tails beyond the grid are closed by a power-law x
// log-periodic model of f.
class PsiResolvent {
 public:
  explicit PsiResolvent(Dimension dim) : dim_(dim) {}
  RadialProfile apply(const RadialProfile& f) const;

 private:
  Dimension dim_;
};

// S(f) = [ rho int_0^r f LambdaQbar e^{intW} s^{d+1} ds
//        - LambdaQbar int_0^r f rho e^{intW} s^{d+1} ds ] / C,   H(S f) = f.
class SResolvent {
 public:
  SResolvent(const SteadyPair& steady, FundamentalSolution lambda_qbar,
             FundamentalSolution rho);
  RadialProfile apply(const RadialProfile& f) const;
  double wronskian_constant() const { return C_; }
  const FundamentalSolution& lambda_qbar() const { return lam_; }
  const FundamentalSolution& rho() const { return rho_; }

 private:
  const SteadyPair& steady_;
  FundamentalSolution lam_, rho_;
  double C_;
};

// --- weighted norms ----------------------------------------------------------

// X_{r0}: sup_{r0<=r<=1} (r^s |w| + r^{s+1} |w'|) + sup_{r>=1} (r^4 |w| + r^5 |w'|),
//         s = (d+2)/2  (the paper's 5/2, 7/2 for d=3).
// Y_{r1}: sup_{0<=r<=r1} (1+r)^{-1/2} (|w| + |r w'|).
struct NormSpec {
  enum class Tag { X_r0, Y_r1 } tag;
  double param;  // r0 or r1
  Dimension dim;
};

double weighted_norm(const NormSpec& spec, const RadialProfile& w);

}  // namespace ks
