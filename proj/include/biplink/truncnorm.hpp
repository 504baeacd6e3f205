#pragma once

#include "biplink/rng.hpp"

namespace biplink {

double normal_cdf(double x);
double normal_cdf_upper(double x);
double log_normal_cdf(double x);
double normal_pdf(double x);

// Inverse standard normal CDF (Wichura AS241, double precision).
double normal_quantile(double p);

// Normal(center, sd^2) truncated to the open unit interval, drawn by
// inverse CDF on the truncated range. Stable for centers far outside (0,1):
// the CDF mixture is evaluated in whichever tail carries the mass.
double sample_truncnorm01(double center, double sd, RngStream& rng);

// Mass assigned to (0,1) by Normal(center, sd^2), and the mean of the
// truncated distribution. Used by enumeration oracles and summaries.
double truncnorm01_mass(double center, double sd);
double truncnorm01_mean(double center, double sd);

}  // namespace biplink
