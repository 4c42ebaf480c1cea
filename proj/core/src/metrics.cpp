#include "praim/metrics.hpp"

#include <cmath>
#include <limits>

#include "praim/common.hpp"
#include "praim/losses.hpp"
#include "praim/stats.hpp"

namespace praim {

double mae(const std::vector<double>& predictions,
           const std::vector<double>& truth,
           const std::vector<std::size_t>& index_set) {
  if (predictions.size() != truth.size()) {
    throw ValidationError("prediction and truth lengths differ");
  }
  if (index_set.empty()) {
    throw ValidationError("MAE needs a non-empty index set");
  }
  double sum = 0.0;
  for (const std::size_t i : index_set) {
    if (i >= predictions.size()) {
      throw ValidationError("MAE index out of range");
    }
    sum += std::abs(predictions[i] - truth[i]);
  }
  return sum / static_cast<double>(index_set.size());
}

double gaussian_crps(double truth, double mean, double sigma) {
  if (!(sigma > 0.0)) {
    throw ValidationError("CRPS needs a positive scale");
  }
  constexpr double kInvSqrtPi = 0.5641895835477563;
  const double z = (truth - mean) / sigma;
  return sigma *
         (z * (2.0 * normal_cdf(z) - 1.0) + 2.0 * normal_pdf(z) - kInvSqrtPi);
}

ProbMetrics prob_metrics(const std::vector<double>& mean,
                         const std::vector<double>& variance,
                         const std::vector<double>& truth,
                         const std::vector<std::size_t>& index_set,
                         const std::vector<double>& alphas) {
  if (mean.size() != variance.size() || mean.size() != truth.size()) {
    throw ValidationError("probabilistic metric inputs differ in length");
  }
  if (index_set.empty()) {
    throw ValidationError("probabilistic metrics need a non-empty index set");
  }
  ProbMetrics out;
  const auto n = static_cast<double>(index_set.size());
  for (const std::size_t i : index_set) {
    if (i >= mean.size()) {
      throw ValidationError("probabilistic metric index out of range");
    }
    const double var = variance[i];
    if (!(var > 0.0)) {
      throw ValidationError("variance must be positive at scored positions");
    }
    const double resid = truth[i] - mean[i];
    out.nll += resid * resid / (2.0 * var) + 0.5 * std::log(var) +
               kHalfLog2Pi;
    out.crps += gaussian_crps(truth[i], mean[i], std::sqrt(var));
  }
  out.nll /= n;
  out.crps /= n;

  for (const double alpha : alphas) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
      throw ValidationError("coverage level must lie in (0, 1)");
    }
    const double half_width = normal_quantile((1.0 + alpha) / 2.0);
    std::size_t inside = 0;
    for (const std::size_t i : index_set) {
      const double sigma = std::sqrt(variance[i]);
      if (std::abs(truth[i] - mean[i]) <= half_width * sigma) ++inside;
    }
    out.icp.emplace_back(alpha, static_cast<double>(inside) / n);
  }
  return out;
}

std::vector<std::pair<double, double>> calibration_curve(
    const std::vector<double>& mean, const std::vector<double>& variance,
    const std::vector<double>& truth, const std::vector<double>& alphas) {
  std::vector<std::size_t> all(mean.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return prob_metrics(mean, variance, truth, all, alphas).icp;
}

namespace {

struct Moments {
  double mean = 0.0;
  double std = 0.0;  // population
};

Moments moments_of(const std::vector<double>& values) {
  Moments m;
  for (const double v : values) m.mean += v;
  m.mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (const double v : values) ss += (v - m.mean) * (v - m.mean);
  m.std = std::sqrt(ss / static_cast<double>(values.size()));
  return m;
}

}  // namespace

DistributionReport dist_compare(const std::vector<double>& observed,
                                const std::vector<double>& imputed) {
  if (observed.empty() || imputed.empty()) {
    throw ValidationError("distribution comparison needs non-empty samples");
  }
  DistributionReport report;
  const Moments obs = moments_of(observed);
  const Moments imp = moments_of(imputed);

  if (obs.mean == 0.0) {
    report.mean_rel_defined = false;
    report.mean_rel_diff = std::numeric_limits<double>::quiet_NaN();
  } else {
    report.mean_rel_diff = (imp.mean - obs.mean) / obs.mean;
  }
  if (obs.mean == 0.0 || imp.mean == 0.0) {
    report.cv_defined = false;
    report.cv_diff = std::numeric_limits<double>::quiet_NaN();
  } else {
    report.cv_diff = imp.std / imp.mean - obs.std / obs.mean;
  }

  report.wasserstein = wasserstein1(observed, imputed);
  const KsResult ks = ks_two_sample(observed, imputed);
  report.ks_stat = ks.statistic;
  report.ks_p = ks.p_value;
  const MwuResult mwu = mwu_two_sample(observed, imputed);
  report.mwu_stat = mwu.u;
  report.mwu_p = mwu.p_value;
  report.similar_ks = report.ks_p > 0.05;
  report.similar_mwu = report.mwu_p > 0.05;
  return report;
}

DowQqReport dow_profile_and_qq(const std::vector<DatedValue>& observed,
                               const std::vector<DatedValue>& imputed) {
  if (observed.empty() || imputed.empty()) {
    throw ValidationError("profile comparison needs non-empty samples");
  }
  DowQqReport report;
  auto bucket_means = [](const std::vector<DatedValue>& values) {
    std::array<double, 7> sums{};
    std::array<std::size_t, 7> counts{};
    for (const DatedValue& dv : values) {
      const auto d = static_cast<std::size_t>(day_of_week(dv.date));
      sums[d] += dv.value;
      ++counts[d];
    }
    std::array<std::optional<double>, 7> means;
    for (std::size_t d = 0; d < 7; ++d) {
      if (counts[d] > 0) means[d] = sums[d] / static_cast<double>(counts[d]);
    }
    return means;
  };
  report.dow_mean_observed = bucket_means(observed);
  report.dow_mean_imputed = bucket_means(imputed);

  std::vector<double> obs_values, imp_values;
  obs_values.reserve(observed.size());
  imp_values.reserve(imputed.size());
  for (const DatedValue& dv : observed) obs_values.push_back(dv.value);
  for (const DatedValue& dv : imputed) imp_values.push_back(dv.value);
  for (int percent = 1; percent <= 99; ++percent) {
    const double q = static_cast<double>(percent) / 100.0;
    report.qq.push_back({static_cast<double>(percent),
                         quantile(obs_values, q), quantile(imp_values, q)});
  }
  return report;
}

namespace {

// Gap-length distribution over buckets {1..6, 7+} (index 0..6).
std::array<double, 7> gap_length_dist(const std::vector<std::uint8_t>& mask,
                                      std::size_t* gap_count) {
  std::array<double, 7> dist{};
  std::size_t total = 0;
  std::size_t i = 0;
  while (i < mask.size()) {
    if (!mask[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < mask.size() && mask[j]) ++j;
    const std::size_t len = j - i;
    dist[std::min<std::size_t>(len, 7) - 1] += 1.0;
    ++total;
    i = j;
  }
  if (total > 0) {
    for (double& d : dist) d /= static_cast<double>(total);
  }
  *gap_count = total;
  return dist;
}

std::array<double, 7> dow_missing_freq(const std::vector<std::uint8_t>& mask,
                                       const Date& start) {
  std::array<double, 7> freq{};
  double total = 0.0;
  Date day = start;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) {
      freq[static_cast<std::size_t>(day_of_week(day))] += 1.0;
      total += 1.0;
    }
    day = add_days(day, 1);
  }
  if (total > 0.0) {
    for (double& f : freq) f /= total;
  }
  return freq;
}

}  // namespace

MaskFidelityReport mask_fidelity(const std::vector<std::uint8_t>& real_mask,
                                 const Date& real_start,
                                 const std::vector<std::uint8_t>& synth_mask,
                                 const Date& synth_start) {
  if (real_mask.empty() || synth_mask.empty()) {
    throw ValidationError("mask fidelity needs non-empty masks");
  }
  MaskFidelityReport report;

  std::size_t real_gaps = 0, synth_gaps = 0;
  const auto real_dist = gap_length_dist(real_mask, &real_gaps);
  const auto synth_dist = gap_length_dist(synth_mask, &synth_gaps);
  if (real_gaps == 0 || synth_gaps == 0) {
    report.gap_defined = false;
    report.gap_wd = std::numeric_limits<double>::quiet_NaN();
  } else {
    // Discrete W1 on a unit-spaced ordered support: sum of |CDF differences|
    // at the first six buckets.
    double cdf_real = 0.0, cdf_synth = 0.0, w1 = 0.0;
    for (std::size_t b = 0; b + 1 < 7; ++b) {
      cdf_real += real_dist[b];
      cdf_synth += synth_dist[b];
      w1 += std::abs(cdf_real - cdf_synth);
    }
    report.gap_wd = w1;
  }

  const auto real_freq = dow_missing_freq(real_mask, real_start);
  const auto synth_freq = dow_missing_freq(synth_mask, synth_start);
  report.dow_js =
      js_divergence(std::vector<double>(real_freq.begin(), real_freq.end()),
                    std::vector<double>(synth_freq.begin(), synth_freq.end()));

  const auto real_ac = lag1_autocorrelation(
      std::vector<double>(real_mask.begin(), real_mask.end()));
  const auto synth_ac = lag1_autocorrelation(
      std::vector<double>(synth_mask.begin(), synth_mask.end()));
  if (!real_ac || !synth_ac) {
    report.lag1_defined = false;
    report.lag1_ac_abs_diff = std::numeric_limits<double>::quiet_NaN();
  } else {
    report.lag1_ac_abs_diff = std::abs(*real_ac - *synth_ac);
  }
  return report;
}

}  // namespace praim
