#pragma once

#include <cstddef>

#include "praim/ingest.hpp"

namespace praim {

struct ForecasterImpact {
  double mae_raw = 0.0;
  double mae_imputed = 0.0;
  double mse_raw = 0.0;
  double mse_imputed = 0.0;
  double delta_mae_pct = 0.0;  // ((raw - imputed)/raw) * 100
  double delta_mse_pct = 0.0;
  bool zero_baseline = false;  // raw-variant error is exactly zero
  std::size_t n_eval_raw = 0;
  std::size_t n_eval_imputed = 0;
};

struct ForecastImpact {
  ForecasterImpact seasonal_naive;  // lag-7 carryover
  ForecasterImpact ridge_ar;        // ridge-regularized AR on the lookback
};

// Downstream forecasting diagnostic: rolling (lookback -> horizon) forecasts
// over one series, run once on raw-only windows (lookback and target all
// genuinely observed) and once on the imputed-complete series. Errors count
// only target days with genuine observations.
ForecastImpact forecast_impact(const DailyDemandSeries& raw,
                               const DailyDemandSeries& imputed,
                               int horizon = 3, int lookback = 7);

}  // namespace praim
