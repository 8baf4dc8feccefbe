#include "ks/kummer.hpp"

#include <cmath>

namespace ks {
namespace kummer {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Lanczos g=7, n=9 coefficient set.
constexpr double kLanczos[9] = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

bool near_nonpositive_integer(cplx z) {
  if (z.real() > 0.4) return false;
  const double nearest = std::round(z.real());
  return nearest <= 0.0 && std::abs(z.real() - nearest) < 1e-12 &&
         std::abs(z.imag()) < 1e-12;
}

}  // namespace

cplx gamma_complex(cplx z) {
  if (near_nonpositive_integer(z)) throw PoleError("gamma_complex: pole at non-positive integer");
  if (z.real() < 0.5) {
    // reflection: Gamma(z) = pi / (sin(pi z) Gamma(1-z))
    return kPi / (std::sin(kPi * z) * gamma_complex(1.0 - z));
  }
  z -= 1.0;
  cplx x = kLanczos[0];
  for (int i = 1; i < 9; ++i) x += kLanczos[i] / (z + cplx(double(i), 0));
  const cplx t = z + 7.5;
  return std::sqrt(2 * kPi) * std::pow(t, z + 0.5) * std::exp(-t) * x;
}

cplx kummer_M(cplx a, cplx b, double xi, KummerMode mode) {
  if (near_nonpositive_integer(b)) throw PoleError("kummer_M: b at non-positive integer");
  if (mode == KummerMode::series) {
    if (xi > 30.0) throw ParameterError("kummer_M: series mode requires xi <= 30");
    cplx term = 1.0, sum = 1.0;
    for (int n = 0; n < 10000; ++n) {
      term *= (a + double(n)) / (b + double(n)) * xi / double(n + 1);
      sum += term;
      if (std::abs(term) < 1e-16 * std::abs(sum)) return sum;
    }
    throw PrecisionError("kummer_M: series did not converge within 10^4 terms");
  }
  if (xi < 20.0) throw ParameterError("kummer_M: asymptotic mode requires xi >= 20");
  // M ~ Gamma(b)/Gamma(a) e^xi xi^{a-b} sum_n (b-a)_n (1-a)_n / (n! xi^n),
  // summed to optimal truncation (terms stop decreasing near n ~ xi).
  cplx corr = 1.0, term = 1.0;
  double prev = 1.0;
  for (int n = 0; n < 200; ++n) {
    term *= (b - a + double(n)) * (1.0 - a + double(n)) / (double(n + 1) * xi);
    const double mag = std::abs(term);
    if (mag > prev) break;
    corr += term;
    prev = mag;
    if (mag < 1e-17 * std::abs(corr)) break;
  }
  return gamma_complex(b) / gamma_complex(a) * std::exp(xi) * std::pow(cplx(xi), a - b) * corr;
}

cplx tricomi_U(cplx a, cplx b, double xi) {
  if (xi > 20.0) {
    // 2F0 asymptotic, truncated where terms stop decreasing.
    cplx sum = 1.0, term = 1.0;
    double prev = 1.0;
    for (int n = 0; n < 200; ++n) {
      term *= -(a + double(n)) * (a - b + 1.0 + double(n)) / (double(n + 1) * xi);
      const double mag = std::abs(term);
      if (mag > prev) break;
      sum += term;
      prev = mag;
      if (mag < 1e-17 * std::abs(sum)) break;
    }
    return std::pow(cplx(xi), -a) * sum;
  }
  // U = Gamma(1-b)/Gamma(a-b+1) M(a,b,xi) + Gamma(b-1)/Gamma(a) xi^{1-b} M(a-b+1,2-b,xi)
  const cplx c1 = gamma_complex(1.0 - b) / gamma_complex(a - b + 1.0);
  const cplx c2 = gamma_complex(b - 1.0) / gamma_complex(a);
  return c1 * kummer_M(a, b, xi, KummerMode::series) +
         c2 * std::pow(cplx(xi), 1.0 - b) * kummer_M(a - b + 1.0, 2.0 - b, xi, KummerMode::series);
}

double u1_via_kummer(double r, double* imag_resid) {
  if (r < 2.0) throw DomainError("u1_via_kummer: valid for r >= 2");
  const double xi = r * r / 4.0;
  auto branch = [&](cplx gamma) {
    const cplx a = 1.0 - gamma / 2.0;
    const cplx b = 3.5 - gamma;
    // z^{-gamma/2} U(a,b,z/4) * 4^{-a} has r^2 u -> 1
    const cplx z(r * r, 0);
    return std::pow(z, -gamma / 2.0) * tricomi_U(a, b, xi) * std::pow(cplx(4.0), -a);
  };
  const cplx g1(2.5, 0.5 * std::sqrt(7.0));
  const cplx w = 0.5 * (branch(g1) + branch(std::conj(g1)));
  if (imag_resid) *imag_resid = std::abs(w.imag());
  return w.real();
}

}  // namespace kummer
}  // namespace ks
