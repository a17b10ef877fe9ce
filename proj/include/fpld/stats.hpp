#pragma once

// Small statistics helpers for the test and validation suites.

#include <span>
#include <vector>

namespace fpld::stats {

double mean(std::span<const double> x);
/// Unbiased sample variance.
double variance(std::span<const double> x);
double standard_error(std::span<const double> x);

/// Kolmogorov survival function P(K > lambda) for the limiting distribution.
double kolmogorov_sf(double lambda);

struct KsResult {
  double statistic = 0;
  double p_value = 1;
};

/// One-sample KS test against Uniform[lo, hi].
KsResult ks_uniform(std::vector<double> sample, double lo, double hi);
/// Two-sample KS test.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Least-squares slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y);

}  // namespace fpld::stats
