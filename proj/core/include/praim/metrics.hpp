#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "praim/dates.hpp"

namespace praim {

// Mean absolute error over the given positions only.
double mae(const std::vector<double>& predictions,
           const std::vector<double>& truth,
           const std::vector<std::size_t>& index_set);

// Closed-form CRPS of a Gaussian forecast against a realized value.
double gaussian_crps(double truth, double mean, double sigma);

struct ProbMetrics {
  double nll = 0.0;   // per-step Gaussian negative log-likelihood
  double crps = 0.0;  // mean closed-form CRPS
  std::vector<std::pair<double, double>> icp;  // (alpha, coverage)
};

ProbMetrics prob_metrics(const std::vector<double>& mean,
                         const std::vector<double>& variance,
                         const std::vector<double>& truth,
                         const std::vector<std::size_t>& index_set,
                         const std::vector<double>& alphas);

inline const std::vector<double>& default_calibration_levels() {
  static const std::vector<double> levels = {0.5, 0.6, 0.7, 0.8, 0.9, 0.95};
  return levels;
}

// Empirical coverage of the central alpha-interval, per alpha, over all
// positions.
std::vector<std::pair<double, double>> calibration_curve(
    const std::vector<double>& mean, const std::vector<double>& variance,
    const std::vector<double>& truth,
    const std::vector<double>& alphas = default_calibration_levels());

struct DistributionReport {
  double mean_rel_diff = 0.0;
  bool mean_rel_defined = true;  // false when the observed mean is zero
  double cv_diff = 0.0;
  bool cv_defined = true;
  double wasserstein = 0.0;
  double ks_stat = 0.0;
  double ks_p = 1.0;
  double mwu_stat = 0.0;
  double mwu_p = 1.0;
  bool similar_ks = true;   // p > 0.05
  bool similar_mwu = true;  // p > 0.05
};

DistributionReport dist_compare(const std::vector<double>& observed,
                                const std::vector<double>& imputed);

struct DowQqReport {
  std::array<std::optional<double>, 7> dow_mean_observed;  // index 0 = Monday
  std::array<std::optional<double>, 7> dow_mean_imputed;
  // (percent, observed quantile, imputed quantile) for percents 1..99.
  std::vector<std::array<double, 3>> qq;
};

struct DatedValue {
  Date date;
  double value = 0.0;
};

DowQqReport dow_profile_and_qq(const std::vector<DatedValue>& observed,
                               const std::vector<DatedValue>& imputed);

struct MaskFidelityReport {
  double gap_wd = 0.0;  // W1 between gap-length PMFs on support {1..6, 7+}
  bool gap_defined = true;
  double dow_js = 0.0;  // JS divergence of DoW missing-frequency profiles
  double lag1_ac_abs_diff = 0.0;
  bool lag1_defined = true;  // false when either indicator series is constant
};

MaskFidelityReport mask_fidelity(const std::vector<std::uint8_t>& real_mask,
                                 const Date& real_start,
                                 const std::vector<std::uint8_t>& synth_mask,
                                 const Date& synth_start);

}  // namespace praim
