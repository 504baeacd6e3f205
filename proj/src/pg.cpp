#include "biplink/pg.hpp"

#include <cmath>

#include "biplink/truncnorm.hpp"

namespace biplink {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTrunc = 0.64;

// Piecewise coefficients of the alternating series for the Jacobi density.
double a_coef(int n, double x) {
  const double k = n + 0.5;
  if (x <= kTrunc) {
    return kPi * k * std::pow(2.0 / (kPi * x), 1.5) * std::exp(-2.0 * k * k / x);
  }
  return kPi * k * std::exp(-0.5 * k * k * kPi * kPi * x);
}

// Probability that the proposal falls in the exponential (right) branch.
double right_branch_prob(double z) {
  const double fz = kPi * kPi / 8.0 + 0.5 * z * z;
  const double b = std::sqrt(1.0 / kTrunc) * (kTrunc * z - 1.0);
  const double a = -std::sqrt(1.0 / kTrunc) * (kTrunc * z + 1.0);
  const double x0 = std::log(fz) + fz * kTrunc;
  const double xb = x0 - z + log_normal_cdf(b);
  const double xa = x0 + z + log_normal_cdf(a);
  const double qdivp = 4.0 / kPi * (std::exp(xb) + std::exp(xa));
  return 1.0 / (1.0 + qdivp);
}

// Inverse-Gaussian(1/z, 1) restricted to (0, t].
double sample_trunc_invgauss(double z, double t, RngStream& rng) {
  const double mu = 1.0 / z;
  if (mu > t || !std::isfinite(mu)) {
    for (;;) {
      double e1, e2;
      do {
        e1 = rng.exponential();
        e2 = rng.exponential();
      } while (e1 * e1 > 2.0 * e2 / t);
      const double d = 1.0 + t * e1;
      const double x = t / (d * d);
      if (rng.uniform01() <= std::exp(-0.5 * z * z * x)) return x;
    }
  }
  for (;;) {
    double y = rng.normal();
    y *= y;
    double x = mu + 0.5 * mu * mu * y -
               0.5 * mu * std::sqrt(4.0 * mu * y + mu * mu * y * y);
    if (rng.uniform01() > mu / (mu + x)) x = mu * mu / x;
    if (x <= t) return x;
  }
}

}  // namespace

double sample_pg1(double z, RngStream& rng) {
  z = 0.5 * std::abs(z);
  const double fz = kPi * kPi / 8.0 + 0.5 * z * z;
  const double p_right = right_branch_prob(z);
  for (;;) {
    double x;
    if (rng.uniform01() < p_right) {
      x = kTrunc + rng.exponential() / fz;
    } else {
      x = sample_trunc_invgauss(z, kTrunc, rng);
    }
    double s = a_coef(0, x);
    const double y = rng.uniform01() * s;
    for (int n = 1;; ++n) {
      if (n & 1) {
        s -= a_coef(n, x);
        if (y <= s) return 0.25 * x;
      } else {
        s += a_coef(n, x);
        if (y > s) break;
      }
    }
  }
}

}  // namespace biplink
