#include "cvmbqc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cvmbqc::stats {

double mean(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("mean of empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double variance(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

double stderr_of_mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  return std::sqrt(variance(xs) / static_cast<double>(xs.size()));
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw std::invalid_argument("linear_fit: bad input");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double nn = static_cast<double>(n);
  const double denom = nn * sxx - sx * sx;
  LinearFit f;
  f.slope = (nn * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / nn;
  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / nn;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
    ss_tot += (y[i] - ybar) * (y[i] - ybar);
  }
  f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  if (n > 2) {
    const double s2 = ss_res / static_cast<double>(n - 2);
    f.slope_se = std::sqrt(nn * s2 / denom);
  }
  return f;
}

LinearFit linear_fit_weighted(const std::vector<double>& x,
                              const std::vector<double>& y,
                              const std::vector<double>& sigma) {
  const std::size_t n = x.size();
  if (n != y.size() || n != sigma.size() || n < 2)
    throw std::invalid_argument("linear_fit_weighted: bad input");
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 1.0 / (sigma[i] * sigma[i]);
    sw += w;
    swx += w * x[i];
    swy += w * y[i];
    swxx += w * x[i] * x[i];
    swxy += w * x[i] * y[i];
  }
  const double denom = sw * swxx - swx * swx;
  LinearFit f;
  f.slope = (sw * swxy - swx * swy) / denom;
  f.intercept = (swy - f.slope * swx) / sw;
  f.slope_se = std::sqrt(sw / denom);
  double ss_res = 0, ss_tot = 0;
  const double ybar = swy / sw;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
    ss_tot += (y[i] - ybar) * (y[i] - ybar);
  }
  f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

namespace {

double kolmogorov_q(double lambda) {
  if (lambda < 1e-8) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_test: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max(d, std::max(std::abs(f - lo), std::abs(hi - f)));
  }
  const double sn = std::sqrt(n);
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  return {d, kolmogorov_q(lambda)};
}

Proportion proportion_ci(long successes, long trials, double z) {
  if (trials <= 0) throw std::invalid_argument("proportion_ci: no trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {p, std::max(0.0, center - half), std::min(1.0, center + half)};
}

HistogramCheck multinomial_check(const std::vector<long>& counts,
                                 const std::vector<double>& probs, long n_samples,
                                 double z, double pool_threshold) {
  if (counts.size() != probs.size()) throw std::invalid_argument("multinomial_check: size mismatch");
  HistogramCheck res;
  res.ok = true;
  double pooled_count = 0.0;
  double pooled_p = 0.0;
  const double n = static_cast<double>(n_samples);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double expect = n * probs[i];
    if (expect >= pool_threshold) {
      const double sd = std::sqrt(expect * (1.0 - probs[i]));
      const double zi = sd > 0 ? std::abs(counts[i] - expect) / sd : 0.0;
      res.max_z = std::max(res.max_z, zi);
      if (zi > z) res.ok = false;
    } else {
      pooled_count += static_cast<double>(counts[i]);
      pooled_p += probs[i];
    }
  }
  const double expect = n * pooled_p;
  if (expect >= 1.0) {
    const double sd = std::sqrt(expect * (1.0 - pooled_p));
    const double zi = sd > 0 ? std::abs(pooled_count - expect) / sd : 0.0;
    res.max_z = std::max(res.max_z, zi);
    if (zi > z) res.ok = false;
  }
  return res;
}

}  // namespace cvmbqc::stats
