#include "biplink/truncnorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace biplink {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrt2Pi = 0.3989422804014327;
}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_cdf_upper(double x) { return 0.5 * std::erfc(x / kSqrt2); }

double log_normal_cdf(double x) {
  // erfc underflows near x = -38; switch to the asymptotic tail expansion.
  if (x > -37.0) {
    const double p = normal_cdf(x);
    if (p > 0.0) return std::log(p);
  }
  const double x2 = x * x;
  return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * kPi) +
         std::log1p(-1.0 / x2 + 3.0 / (x2 * x2));
}

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    throw std::invalid_argument("normal_quantile: p outside [0,1]");
  }
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) *
                    r +
                4.5921953931549871457e+4) *
                   r +
               1.3731693765509461125e+4) *
                  r +
              1.9715909503065514427e+3) *
                 r +
             1.3314166789178437745e+2) *
                r +
            3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) *
                    r +
                2.1213794301586595867e+4) *
                   r +
               5.3941960214247511077e+3) *
                  r +
              6.8718700749205790830e+2) *
                 r +
             4.2313330701600911252e+1) *
                r +
            1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) *
                   r +
               1.27045825245236838258e+0) *
                  r +
              3.64784832476320460504e+0) *
                 r +
             5.76949722146069140550e+0) *
                r +
            4.63033784615654529590e+0) *
               r +
           1.42343711074968357734e+0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) *
                   r +
               1.48103976427480074590e-1) *
                  r +
              6.89767334985100004550e-1) *
                 r +
             1.67638483018380384940e+0) *
                r +
            2.05319162663775882187e+0) *
               r +
           1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) *
                   r +
               2.65321895265761230930e-2) *
                  r +
              2.96560571828504891230e-1) *
                 r +
             1.78482653991729133580e+0) *
                r +
            5.46378491116411436990e+0) *
               r +
           6.65790464350110377720e+0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) *
                   r +
               7.86869131145613259100e-4) *
                  r +
              1.48753612908506148525e-2) *
                 r +
             1.36929880922735805310e-1) *
                r +
            5.99832206555887937690e-1) *
               r +
           1.0);
  }
  return q < 0.0 ? -val : val;
}

namespace {

struct UnitBounds {
  double lo;  // (0 - center) / sd
  double hi;  // (1 - center) / sd
};

UnitBounds unit_bounds(double center, double sd) {
  if (!(sd > 0.0)) throw std::invalid_argument("truncnorm01: sd must be positive");
  return {(0.0 - center) / sd, (1.0 - center) / sd};
}

}  // namespace

double truncnorm01_mass(double center, double sd) {
  const auto [lo, hi] = unit_bounds(center, sd);
  if (lo >= 0.0) return normal_cdf_upper(lo) - normal_cdf_upper(hi);
  if (hi <= 0.0) return normal_cdf(hi) - normal_cdf(lo);
  return normal_cdf(hi) - normal_cdf(lo);
}

double truncnorm01_mean(double center, double sd) {
  const auto [lo, hi] = unit_bounds(center, sd);
  const double z = truncnorm01_mass(center, sd);
  if (z <= 0.0) throw std::domain_error("truncnorm01_mean: no mass on (0,1)");
  return center + sd * (normal_pdf(lo) - normal_pdf(hi)) / z;
}

double sample_truncnorm01(double center, double sd, RngStream& rng) {
  const auto [lo, hi] = unit_bounds(center, sd);
  const double u = rng.uniform01();
  double z;
  if (lo >= 0.0) {
    // Mass sits in the upper tail of the standard normal; interpolate
    // between upper-tail probabilities, which stay far from 1.
    const double slo = normal_cdf_upper(lo);
    const double shi = normal_cdf_upper(hi);
    const double s = shi + (slo - shi) * u;
    z = -normal_quantile(std::max(s, std::numeric_limits<double>::min()));
  } else if (hi <= 0.0) {
    const double plo = normal_cdf(lo);
    const double phi = normal_cdf(hi);
    const double p = plo + (phi - plo) * u;
    z = normal_quantile(std::max(p, std::numeric_limits<double>::min()));
  } else {
    const double plo = normal_cdf(lo);
    const double phi = normal_cdf(hi);
    const double p = plo + (phi - plo) * u;
    z = normal_quantile(std::min(std::max(p, std::numeric_limits<double>::min()),
                                 1.0 - std::numeric_limits<double>::epsilon()));
  }
  const double x = center + sd * z;
  const double eps = 1e-15;
  return std::clamp(x, eps, 1.0 - eps);
}

}  // namespace biplink
