#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace testutil {

inline double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double sd(const std::vector<double>& v) {
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

inline double stderr_of_mean(const std::vector<double>& v) {
  return sd(v) / std::sqrt(static_cast<double>(v.size()));
}

// Two-sample Kolmogorov-Smirnov p-value (asymptotic).
inline double ks2_pvalue(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double n1 = static_cast<double>(a.size());
  const double n2 = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
  }
  const double ne = std::sqrt(n1 * n2 / (n1 + n2));
  const double lam = (ne + 0.12 + 0.11 / ne) * d;
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) {
    q += 2.0 * ((k & 1) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lam * lam);
  }
  return std::clamp(q, 0.0, 1.0);
}

// One-sample KS p-value against a supplied CDF.
template <typename Cdf>
inline double ks1_pvalue(std::vector<double> a, Cdf cdf) {
  std::sort(a.begin(), a.end());
  const double n = static_cast<double>(a.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double f = cdf(a[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  const double ne = std::sqrt(n);
  const double lam = (ne + 0.12 + 0.11 / ne) * d;
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) {
    q += 2.0 * ((k & 1) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lam * lam);
  }
  return std::clamp(q, 0.0, 1.0);
}

}  // namespace testutil
