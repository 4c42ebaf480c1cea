#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "praim/forecast.hpp"
#include "praim/imputer.hpp"
#include "praim/metrics.hpp"

namespace praim {

/// Everything the evaluation knows about one station's imputation quality.
/// Optional blocks are absent when the station lacks the data to compute
/// them (nothing scored, no usable variances, series too short to forecast).
struct StationEvaluation {
  std::string station_id;
  std::size_t n_imputed = 0;      // days the model filled
  std::size_t n_scored = 0;       // filled days whose truth is observed
  std::size_t n_unreachable = 0;  // gap days no window could cover
  std::size_t n_clamped = 0;
  std::optional<double> mae_kwh;
  std::optional<ProbMetrics> prob;  // normalized scale, matches training
  std::vector<std::pair<double, double>> calibration;  // (alpha, coverage)
  std::optional<DistributionReport> dist;  // observed vs imputed, kWh
  std::optional<DowQqReport> dowqq;
  std::optional<ForecastImpact> forecast;
};

struct EvaluationReport {
  std::string config_json = "{}";
  StationEvaluation pooled;  // station_id "all", data concatenated
  std::vector<StationEvaluation> stations;
};

// Prediction and truth must describe the same station over the same days.
StationEvaluation evaluate_station(const ImputationResult& prediction,
                                   const DailyDemandSeries& truth);

// Pairs predictions with truths by station id (every prediction needs its
// truth; extra truths are ignored) and adds the pooled aggregate.
EvaluationReport evaluate_imputations(
    const std::vector<ImputationResult>& predictions,
    const std::vector<DailyDemandSeries>& truths,
    const std::string& config_json);

// One JSON document; numeric NaN round-trips as null.
std::string report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const std::string& text);

// Flat tables under dir: metrics.csv, calibration.csv, distribution.csv,
// dow.csv, qq.csv, forecast.csv.
void write_report_tables(const EvaluationReport& report,
                         const std::string& dir);

// Charts under dir: calibration.svg, dow_profile.svg, qq.svg,
// mae_by_station.svg.
void write_report_plots(const EvaluationReport& report,
                        const std::string& dir);

}  // namespace praim
