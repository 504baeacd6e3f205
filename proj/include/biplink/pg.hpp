#pragma once

#include <cmath>

#include "biplink/rng.hpp"

namespace biplink {

// Exact draw from the Polya-Gamma PG(1, z) distribution by the
// alternating-series accept/reject scheme on the tilted Jacobi density
// (exponential proposal right of the truncation point, truncated
// inverse-Gaussian left of it). No approximation anywhere in the support.
double sample_pg1(double z, RngStream& rng);

// E[PG(1, z)] = tanh(z/2) / (2z), with the z -> 0 limit 1/4.
inline double pg_mean(double z) {
  const double az = std::abs(z);
  if (az < 1e-8) return 0.25 - az * az / 48.0;
  return std::tanh(0.5 * z) / (2.0 * z);
}

}  // namespace biplink
