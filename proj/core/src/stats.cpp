#include "praim/stats.hpp"

#include <algorithm>
#include <cmath>

#include "praim/common.hpp"

namespace praim {

double normal_pdf(double x) {
  constexpr double kInvSqrt2Pi = 0.3989422804014327;
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double normal_cdf(double x) {
  constexpr double kInvSqrt2 = 0.7071067811865476;
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ValidationError("quantile probability must lie in (0, 1), got " +
                          format_double(p));
  }
  // Rational approximations in three regions (central, two tails).
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // One Halley step against the exact CDF.
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double wasserstein1(std::vector<double> x, std::vector<double> y) {
  if (x.empty() || y.empty()) {
    throw ValidationError("Wasserstein distance needs non-empty samples");
  }
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  std::vector<double> grid;
  grid.reserve(x.size() + y.size());
  grid.insert(grid.end(), x.begin(), x.end());
  grid.insert(grid.end(), y.begin(), y.end());
  std::sort(grid.begin(), grid.end());

  double w1 = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double width = grid[i + 1] - grid[i];
    if (width <= 0.0) continue;
    const double fx = static_cast<double>(
                          std::upper_bound(x.begin(), x.end(), grid[i]) -
                          x.begin()) /
                      static_cast<double>(x.size());
    const double fy = static_cast<double>(
                          std::upper_bound(y.begin(), y.end(), grid[i]) -
                          y.begin()) /
                      static_cast<double>(y.size());
    w1 += std::abs(fx - fy) * width;
  }
  return w1;
}

KsResult ks_two_sample(std::vector<double> x, std::vector<double> y) {
  if (x.empty() || y.empty()) {
    throw ValidationError("KS test needs non-empty samples");
  }
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());

  KsResult result;
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    const double fx = static_cast<double>(i) / static_cast<double>(x.size());
    const double fy = static_cast<double>(j) / static_cast<double>(y.size());
    result.statistic = std::max(result.statistic, std::abs(fx - fy));
  }

  const double n1 = static_cast<double>(x.size());
  const double n2 = static_cast<double>(y.size());
  const double ne = std::sqrt(n1 * n2 / (n1 + n2));
  const double lambda =
      (ne + 0.12 + 0.11 / ne) * result.statistic;

  // Kolmogorov survival series with alternating terms; converges fast for
  // lambda > ~0.3, saturates to 1 otherwise.
  double sum = 0.0;
  double sign = 1.0;
  double prev_term = 0.0;
  bool converged = false;
  const double l2 = lambda * lambda;
  for (int k = 1; k <= 100; ++k) {
    const double term = sign * 2.0 * std::exp(-2.0 * l2 * k * k);
    sum += term;
    if (std::abs(term) <= 1e-3 * prev_term || std::abs(term) <= 1e-8 * sum) {
      converged = true;
      break;
    }
    prev_term = std::abs(term);
    sign = -sign;
  }
  result.p_value = converged ? std::clamp(sum, 0.0, 1.0) : 1.0;
  return result;
}

MwuResult mwu_two_sample(const std::vector<double>& x,
                         const std::vector<double>& y) {
  if (x.empty() || y.empty()) {
    throw ValidationError("Mann-Whitney test needs non-empty samples");
  }
  struct Tagged {
    double value;
    int group;
  };
  std::vector<Tagged> pooled;
  pooled.reserve(x.size() + y.size());
  for (double v : x) pooled.push_back({v, 0});
  for (double v : y) pooled.push_back({v, 1});
  std::sort(pooled.begin(), pooled.end(),
            [](const Tagged& a, const Tagged& b) { return a.value < b.value; });

  const double n1 = static_cast<double>(x.size());
  const double n2 = static_cast<double>(y.size());
  const double n = n1 + n2;

  double rank_sum_x = 0.0;
  double tie_term = 0.0;
  std::size_t i = 0;
  while (i < pooled.size()) {
    std::size_t j = i;
    while (j < pooled.size() && pooled[j].value == pooled[i].value) ++j;
    const auto t = static_cast<double>(j - i);
    // Midrank of the tied run [i, j): average of ranks i+1 .. j.
    const double midrank = (static_cast<double>(i + 1 + j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (pooled[k].group == 0) rank_sum_x += midrank;
    }
    tie_term += t * t * t - t;
    i = j;
  }

  MwuResult result;
  result.u = rank_sum_x - n1 * (n1 + 1.0) / 2.0;
  const double mean_u = n1 * n2 / 2.0;
  const double variance =
      n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (variance <= 0.0) {
    result.p_value = 1.0;
    return result;
  }
  double diff = std::abs(result.u - mean_u) - 0.5;
  if (diff < 0.0) diff = 0.0;
  const double z = diff / std::sqrt(variance);
  result.p_value = std::clamp(2.0 * (1.0 - normal_cdf(z)), 0.0, 1.0);
  return result;
}

double js_divergence(const std::vector<double>& p,
                     const std::vector<double>& q) {
  if (p.size() != q.size() || p.empty()) {
    throw ValidationError("JS divergence needs equal-size distributions");
  }
  constexpr double kFloor = 1e-12;
  std::vector<double> ps(p.size()), qs(q.size());
  double sp = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0 || q[i] < 0.0) {
      throw ValidationError("JS divergence needs non-negative masses");
    }
    ps[i] = std::max(p[i], kFloor);
    qs[i] = std::max(q[i], kFloor);
    sp += ps[i];
    sq += qs[i];
  }
  double js = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double a = ps[i] / sp;
    const double b = qs[i] / sq;
    const double m = 0.5 * (a + b);
    js += 0.5 * a * std::log(a / m) + 0.5 * b * std::log(b / m);
  }
  return std::max(js, 0.0);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ValidationError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) {
    throw ValidationError("quantile level must lie in [0, 1]");
  }
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

std::optional<double> lag1_autocorrelation(const std::vector<double>& x) {
  if (x.size() < 2) return std::nullopt;
  const std::size_t n = x.size() - 1;
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    mean_a += x[t];
    mean_b += x[t + 1];
  }
  mean_a /= static_cast<double>(n);
  mean_b /= static_cast<double>(n);
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double da = x[t] - mean_a;
    const double db = x[t + 1] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a <= 0.0 || var_b <= 0.0) return std::nullopt;
  return cov / std::sqrt(var_a * var_b);
}

}  // namespace praim
