#include "ks/oscillation.hpp"

#include <cmath>
#include <vector>

namespace ks {

namespace {

struct Samples {
  std::vector<double> logr;
  std::vector<double> g;  // r^p (profile - reference)
};

Samples collect(const RadialProfile& prof, const std::function<double(double)>& reference,
                double p, double r_lo, double r_hi, int n) {
  if (!(0 < r_lo && r_lo < r_hi)) throw ParameterError("fit window must satisfy 0 < r_lo < r_hi");
  if (prof.grid.front() > r_lo * (1 + 1e-12) || prof.grid.back() < r_hi * (1 - 1e-12))
    throw DomainError("fit window not covered by profile grid");
  Samples s;
  s.logr.resize(n);
  s.g.resize(n);
  const double la = std::log(r_lo), lb = std::log(r_hi);
  for (int i = 0; i < n; ++i) {
    const double lr = la + (lb - la) * i / double(n - 1);
    const double r = std::exp(lr);
    double v = prof.value(r);
    if (reference) v -= reference(r);
    s.logr[i] = lr;
    s.g[i] = std::pow(r, p) * v;
  }
  return s;
}

// Best (A,B) for g ~ A sin(w lr) + B cos(w lr); returns the residual sum of squares.
double linear_fit(const Samples& s, double w, double& A, double& B) {
  double sss = 0, scc = 0, ssc = 0, sgs = 0, sgc = 0;
  for (std::size_t i = 0; i < s.g.size(); ++i) {
    const double sn = std::sin(w * s.logr[i]), cs = std::cos(w * s.logr[i]);
    sss += sn * sn;
    scc += cs * cs;
    ssc += sn * cs;
    sgs += s.g[i] * sn;
    sgc += s.g[i] * cs;
  }
  const double det = sss * scc - ssc * ssc;
  if (std::abs(det) < 1e-14 * (sss * scc + 1e-300)) {
    A = B = 0;
    return 1e300;
  }
  A = (sgs * scc - sgc * ssc) / det;
  B = (sgc * sss - sgs * ssc) / det;
  double rss = 0;
  for (std::size_t i = 0; i < s.g.size(); ++i) {
    const double m = A * std::sin(w * s.logr[i]) + B * std::cos(w * s.logr[i]);
    rss += (s.g[i] - m) * (s.g[i] - m);
  }
  return rss;
}

double golden(const std::function<double(double)>& f, double a, double b, int iters = 80) {
  const double q = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - q * (b - a), x2 = a + q * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - q * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + q * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

OscillationFit finish(const Samples& s, double w, double p, double r_lo, double r_hi,
                      bool strict) {
  double A, B;
  const double rss = linear_fit(s, w, A, B);
  OscillationFit fit;
  fit.amplitude = std::hypot(A, B);
  fit.phase = std::atan2(B, A);
  if (fit.phase < 0) fit.phase += 2 * M_PI;
  fit.omega = w;
  fit.decay_p = p;
  fit.r_lo = r_lo;
  fit.r_hi = r_hi;
  fit.rms_residual = std::sqrt(rss / double(s.g.size()));
  fit.periods = w * (std::log(r_hi) - std::log(r_lo)) / (2 * M_PI);
  if (fit.amplitude < 1e-12)
    throw DegenerateSignalError("fit_oscillation: amplitude below 1e-12");
  if (strict && fit.rms_residual > 0.05 * fit.amplitude)
    throw FitError("fit_oscillation: rms residual " + std::to_string(fit.rms_residual) +
                   " exceeds 5% of amplitude " + std::to_string(fit.amplitude));
  return fit;
}

}  // namespace

OscillationFit fit_oscillation(const RadialProfile& profile,
                               const std::function<double(double)>& reference, double p,
                               double r_lo, double r_hi, double omega_lo, double omega_hi,
                               bool strict, int n_samples) {
  if (!(0 < omega_lo && omega_lo < omega_hi))
    throw ParameterError("fit_oscillation: bad omega bracket");
  const Samples s = collect(profile, reference, p, r_lo, r_hi, n_samples);
  // Identifiability needs a nontrivial phase span over the window.
  if (omega_hi * (std::log(r_hi) - std::log(r_lo)) < M_PI / 2)
    throw ParameterError("fit_oscillation: window spans less than a quarter period");
  auto obj = [&](double w) {
    double A, B;
    return linear_fit(s, w, A, B);
  };
  const double w = golden(obj, omega_lo, omega_hi);
  return finish(s, w, p, r_lo, r_hi, strict);
}

OscillationFit fit_oscillation_free_p(const RadialProfile& profile,
                                      const std::function<double(double)>& reference,
                                      double p_lo, double p_hi, double r_lo, double r_hi,
                                      double omega_lo, double omega_hi, int n_samples) {
  double best_w = 0;
  auto inner = [&](double p) {
    const Samples s = collect(profile, reference, p, r_lo, r_hi, n_samples);
    auto obj = [&](double w) {
      double A, B;
      return linear_fit(s, w, A, B);
    };
    const double w = golden(obj, omega_lo, omega_hi, 60);
    best_w = w;
    double A, B;
    // Normalize by the signal power so the p-search is scale-free.
    double pow2 = 0;
    for (double g : s.g) pow2 += g * g;
    return linear_fit(s, w, A, B) / (pow2 + 1e-300);
  };
  const double p = golden(inner, p_lo, p_hi, 60);
  const Samples s = collect(profile, reference, p, r_lo, r_hi, n_samples);
  auto obj = [&](double w) {
    double A, B;
    return linear_fit(s, w, A, B);
  };
  const double w = golden(obj, std::max(omega_lo, best_w * 0.8), std::min(omega_hi, best_w * 1.25));
  return finish(s, w, p, r_lo, r_hi, /*strict=*/false);
}

}  // namespace ks
