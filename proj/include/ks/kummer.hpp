#pragma once

#include <complex>

#include "ks/errors.hpp"

namespace ks {
// Closed-form validation of the exterior linearization for d=3 via Kummer's
// equation: u(r) = z^{-gamma/2} nu(r^2/4), gamma = 5/2 + sqrt(7)i/2, and the
// decaying branch is the Tricomi function U(a,b,xi) with a = 1 - gamma/2,
// b = 7/2 - gamma.
namespace kummer {

using cplx = std::complex<double>;

// Lanczos approximation (g = 7, 9 coefficients) with reflection for
// Re(z) < 0.5; relative error < 1e-10 on the validation set.
cplx gamma_complex(cplx z);

enum class KummerMode { series, asymptotic };

// Kummer M(a,b,xi). Series mode sums (a)_n/(b)_n xi^n/n! until the term drops
// below 1e-16 of the partial sum (xi <= 30); asymptotic mode evaluates
// Gamma(b)/Gamma(a) xi^{a-b} e^xi (1 + corrections) for xi >= 20.
cplx kummer_M(cplx a, cplx b, double xi, KummerMode mode);

// Tricomi U(a,b,xi) via the standard two-M connection formula (small/moderate
// xi) or the optimally truncated 2F0 asymptotic series (large xi).
cplx tricomi_U(cplx a, cplx b, double xi);

// The real algebraically-decaying exterior mode, normalized so r^2 u1 -> 1;
// valid for r >= 2 (d = 3 only). |imag_part| of the conjugate-pair assembly is
// returned through *imag_resid when non-null.
double u1_via_kummer(double r, double* imag_resid = nullptr);

}  // namespace kummer
}  // namespace ks
