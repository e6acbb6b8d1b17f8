#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace cvmbqc::stats {

double mean(const std::vector<double>& xs);
double variance(const std::vector<double>& xs);  // unbiased
double stderr_of_mean(const std::vector<double>& xs);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double r2 = 0.0;
};

// Ordinary least squares; slope standard error from residual variance.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// Weighted least squares with known per-point standard deviations; the slope
// standard error comes from the inverse normal matrix.
LinearFit linear_fit_weighted(const std::vector<double>& x,
                              const std::vector<double>& y,
                              const std::vector<double>& sigma);

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

// One-sample Kolmogorov-Smirnov test against a continuous CDF. Uses the
// Stephens small-sample correction and the asymptotic Kolmogorov tail.
KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);

// Wilson score interval for a binomial proportion (95% by default).
struct Proportion {
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};
Proportion proportion_ci(long successes, long trials, double z = 1.959963984540054);

// Checks a histogram against expected multinomial counts: every bin with
// expectation >= pool_threshold must lie within z sigma, smaller bins are
// pooled into one tail bin. Returns the largest |z|-score seen.
struct HistogramCheck {
  bool ok = false;
  double max_z = 0.0;
};
HistogramCheck multinomial_check(const std::vector<long>& counts,
                                 const std::vector<double>& probs, long n_samples,
                                 double z = 3.0, double pool_threshold = 10.0);

}  // namespace cvmbqc::stats
