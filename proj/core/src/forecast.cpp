#include "praim/forecast.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "praim/common.hpp"

namespace praim {
namespace {

constexpr double kRidgePenalty = 1.0;

struct ForecastPair {
  std::size_t origin;  // last lookback index
  int horizon;         // 1-based step ahead
};

struct VariantData {
  const std::vector<double>* values;
  std::vector<ForecastPair> train_pairs;  // lookback+target available
  std::vector<ForecastPair> eval_pairs;   // train pair with genuine target
};

// Direct per-horizon ridge AR: centered normal equations, unpenalized
// intercept.
class RidgeAr {
 public:
  RidgeAr(const VariantData& data, int lookback, int horizon_step) {
    const auto T = static_cast<Eigen::Index>(lookback);
    std::vector<const ForecastPair*> rows;
    for (const ForecastPair& fp : data.train_pairs) {
      if (fp.horizon == horizon_step) rows.push_back(&fp);
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    if (n == 0) {
      w_ = Eigen::VectorXd::Zero(T);
      return;
    }
    Eigen::MatrixXd x(n, T);
    Eigen::VectorXd y(n);
    for (Eigen::Index r = 0; r < n; ++r) {
      const std::size_t o = rows[static_cast<std::size_t>(r)]->origin;
      for (Eigen::Index c = 0; c < T; ++c) {
        x(r, c) = (*data.values)[o + 1 - static_cast<std::size_t>(T) +
                                 static_cast<std::size_t>(c)];
      }
      y(r) = (*data.values)[o + static_cast<std::size_t>(horizon_step)];
    }
    const Eigen::RowVectorXd x_mean = x.colwise().mean();
    const double y_mean = y.mean();
    const Eigen::MatrixXd xc = x.rowwise() - x_mean;
    const Eigen::VectorXd yc = y.array() - y_mean;
    const Eigen::MatrixXd gram =
        xc.transpose() * xc +
        kRidgePenalty * Eigen::MatrixXd::Identity(T, T);
    w_ = gram.ldlt().solve(xc.transpose() * yc);
    intercept_ = y_mean - x_mean * w_;
  }

  double predict(const std::vector<double>& values, std::size_t origin,
                 int lookback) const {
    double acc = intercept_;
    for (int c = 0; c < lookback; ++c) {
      acc += w_(c) * values[origin + 1 - static_cast<std::size_t>(lookback) +
                            static_cast<std::size_t>(c)];
    }
    return acc;
  }

 private:
  Eigen::VectorXd w_;
  double intercept_ = 0.0;
};

struct ErrorAccum {
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  std::size_t n = 0;

  void add(double predicted, double truth) {
    const double e = predicted - truth;
    abs_sum += std::abs(e);
    sq_sum += e * e;
    ++n;
  }
  double mae() const { return abs_sum / static_cast<double>(n); }
  double mse() const { return sq_sum / static_cast<double>(n); }
};

void fill_deltas(ForecasterImpact& impact) {
  if (impact.mae_raw == 0.0 && impact.mse_raw == 0.0) {
    impact.zero_baseline = true;
    impact.delta_mae_pct = 0.0;
    impact.delta_mse_pct = 0.0;
    return;
  }
  impact.delta_mae_pct =
      (impact.mae_raw - impact.mae_imputed) / impact.mae_raw * 100.0;
  impact.delta_mse_pct =
      (impact.mse_raw - impact.mse_imputed) / impact.mse_raw * 100.0;
}

}  // namespace

ForecastImpact forecast_impact(const DailyDemandSeries& raw,
                               const DailyDemandSeries& imputed,
                               int horizon, int lookback) {
  if (horizon < 1 || lookback < 1) {
    throw ValidationError("forecast horizon and lookback must be positive");
  }
  if (lookback < 7) {
    throw ValidationError(
        "seasonal-naive forecasting needs a lookback of at least 7 days");
  }
  if (raw.size() != imputed.size() || !(raw.start_date == imputed.start_date)) {
    throw ValidationError("raw and imputed series are not aligned");
  }
  const std::size_t n = raw.size();
  const auto T = static_cast<std::size_t>(lookback);
  if (n < T + 1) {
    throw ValidationError("series too short for any forecast origin");
  }

  VariantData raw_variant{&raw.demand, {}, {}};
  VariantData imp_variant{&imputed.demand, {}, {}};
  for (std::size_t o = T - 1; o + 1 < n; ++o) {
    bool raw_lookback_ok = true;
    for (std::size_t p = o + 1 - T; p <= o; ++p) {
      if (raw.missing[p]) {
        raw_lookback_ok = false;
        break;
      }
    }
    bool imp_lookback_ok = true;
    for (std::size_t p = o + 1 - T; p <= o; ++p) {
      if (imputed.missing[p]) {
        imp_lookback_ok = false;
        break;
      }
    }
    for (int h = 1; h <= horizon; ++h) {
      const std::size_t target = o + static_cast<std::size_t>(h);
      if (target >= n) break;
      const bool genuine = !raw.missing[target];
      if (raw_lookback_ok && genuine) {
        raw_variant.train_pairs.push_back({o, h});
        raw_variant.eval_pairs.push_back({o, h});
      }
      if (imp_lookback_ok && !imputed.missing[target]) {
        imp_variant.train_pairs.push_back({o, h});
        if (genuine) imp_variant.eval_pairs.push_back({o, h});
      }
    }
  }
  if (raw_variant.eval_pairs.empty() || imp_variant.eval_pairs.empty()) {
    throw ValidationError("no valid forecast origins in the series");
  }

  ForecastImpact out;

  {
    ErrorAccum raw_err, imp_err;
    for (const ForecastPair& fp : raw_variant.eval_pairs) {
      const std::size_t target = fp.origin + static_cast<std::size_t>(fp.horizon);
      raw_err.add(raw.demand[target - 7], raw.demand[target]);
    }
    for (const ForecastPair& fp : imp_variant.eval_pairs) {
      const std::size_t target = fp.origin + static_cast<std::size_t>(fp.horizon);
      imp_err.add(imputed.demand[target - 7], raw.demand[target]);
    }
    out.seasonal_naive.mae_raw = raw_err.mae();
    out.seasonal_naive.mse_raw = raw_err.mse();
    out.seasonal_naive.mae_imputed = imp_err.mae();
    out.seasonal_naive.mse_imputed = imp_err.mse();
    out.seasonal_naive.n_eval_raw = raw_err.n;
    out.seasonal_naive.n_eval_imputed = imp_err.n;
    fill_deltas(out.seasonal_naive);
  }

  {
    ErrorAccum raw_err, imp_err;
    for (int h = 1; h <= horizon; ++h) {
      const RidgeAr raw_model(raw_variant, lookback, h);
      const RidgeAr imp_model(imp_variant, lookback, h);
      for (const ForecastPair& fp : raw_variant.eval_pairs) {
        if (fp.horizon != h) continue;
        const std::size_t target =
            fp.origin + static_cast<std::size_t>(fp.horizon);
        raw_err.add(raw_model.predict(raw.demand, fp.origin, lookback),
                    raw.demand[target]);
      }
      for (const ForecastPair& fp : imp_variant.eval_pairs) {
        if (fp.horizon != h) continue;
        const std::size_t target =
            fp.origin + static_cast<std::size_t>(fp.horizon);
        imp_err.add(imp_model.predict(imputed.demand, fp.origin, lookback),
                    raw.demand[target]);
      }
    }
    out.ridge_ar.mae_raw = raw_err.mae();
    out.ridge_ar.mse_raw = raw_err.mse();
    out.ridge_ar.mae_imputed = imp_err.mae();
    out.ridge_ar.mse_imputed = imp_err.mse();
    out.ridge_ar.n_eval_raw = raw_err.n;
    out.ridge_ar.n_eval_imputed = imp_err.n;
    fill_deltas(out.ridge_ar);
  }
  return out;
}

}  // namespace praim
