#pragma once

#include <optional>
#include <vector>

namespace praim {

double normal_pdf(double x);
double normal_cdf(double x);

// Inverse standard normal CDF, p in (0, 1). Rational initial estimate
// polished with one Halley step; |error| < 1e-13 across the domain.
double normal_quantile(double p);

// Empirical 1-D Wasserstein-1 distance between two samples (quantile
// integral over the merged support; sizes may differ).
double wasserstein1(std::vector<double> x, std::vector<double> y);

struct KsResult {
  double statistic = 0.0;  // sup |F_x - F_y|
  double p_value = 1.0;    // asymptotic Kolmogorov distribution
};

KsResult ks_two_sample(std::vector<double> x, std::vector<double> y);

struct MwuResult {
  double u = 0.0;        // U statistic of the first sample
  double p_value = 1.0;  // two-sided normal approximation
};

// Midrank ties, tie-corrected variance, 0.5 continuity correction.
MwuResult mwu_two_sample(const std::vector<double>& x,
                         const std::vector<double>& y);

// Jensen-Shannon divergence in nats between two distributions over a shared
// support. Zero-probability buckets are floored at 1e-12 and renormalized;
// the result is bounded by ln 2.
double js_divergence(const std::vector<double>& p, const std::vector<double>& q);

// Linearly interpolated empirical quantile, q in [0, 1], values need not be
// sorted.
double quantile(std::vector<double> values, double q);

// Pearson correlation of consecutive pairs (x_t, x_{t+1}); absent when
// either margin is constant.
std::optional<double> lag1_autocorrelation(const std::vector<double>& x);

}  // namespace praim
