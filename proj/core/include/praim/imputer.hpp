#pragma once

#include <string>
#include <vector>

#include "praim/checkpoint.hpp"
#include "praim/corpus.hpp"
#include "praim/embedder.hpp"
#include "praim/ingest.hpp"

namespace praim {

struct ImputedDay {
  Date date;
  double value = 0.0;     // kWh; passthrough of the observation when not imputed
  double variance = 0.0;  // kWh^2; meaningful only when was_imputed
  bool was_imputed = false;
  bool clamped = false;  // negative model mean clamped to zero
  // Normalized-scale prediction plus the window statistics behind it, so
  // likelihood metrics can be recomputed from the artifact alone.
  double mu_norm = 0.0;
  double var_norm = 0.0;
  double norm_mean = 0.0;
  double norm_std = 0.0;
};

struct ImputationResult {
  std::string station_id;
  std::vector<ImputedDay> days;
  std::vector<Date> unreachable;  // gaps no valid window covers, left missing

  // Imputed days become observed; unreachable days stay missing.
  DailyDemandSeries to_series() const;
};

struct ImputeSettings {
  int k = 20;
  bool exclude_self = true;
  std::string prompt_template;  // empty = built-in
};

// Deterministic imputation of the real gaps of one series. Every gap day is
// covered by the candidate window (ending between the gap day and L-1 days
// later) with the most observed days, ties to the earliest anchor; each
// distinct window runs one deterministic forward pass. Predictions are
// denormalized with the window statistics, the variance with the squared
// scale.
ImputationResult impute_series(const DailyDemandSeries& series,
                               const Checkpoint& checkpoint,
                               const RetrievalCorpus& corpus,
                               Embedder& embedder,
                               const StationContext& context,
                               const ImputeSettings& settings);

// Imputation artifact, one row per day. Header: station_id,date,value_kwh,
// variance_kwh2,missing,was_imputed,clamped,mu_norm,var_norm,norm_mean,
// norm_std. missing marks unreachable days only.
void write_imputation_csv(const ImputationResult& result,
                          const std::string& path);
ImputationResult read_imputation_csv(const std::string& path);

}  // namespace praim
