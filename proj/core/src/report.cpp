#include "praim/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>

#include "json.hpp"
#include "praim/common.hpp"
#include "praim/features.hpp"
#include "praim/svg.hpp"

namespace praim {

namespace {

using nlohmann::json;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

json json_number(double v) {
  return std::isfinite(v) ? json(v) : json(nullptr);
}

double number_or_nan(const json& j) {
  return j.is_null() ? kNan : j.get<double>();
}

json pairs_to_json(const std::vector<std::pair<double, double>>& pairs) {
  json out = json::array();
  for (const auto& [a, b] : pairs) out.push_back(json::array({a, b}));
  return out;
}

std::vector<std::pair<double, double>> pairs_from_json(const json& j) {
  std::vector<std::pair<double, double>> out;
  for (const auto& e : j) out.emplace_back(e[0].get<double>(), e[1].get<double>());
  return out;
}

json prob_to_json(const ProbMetrics& p) {
  return json{{"nll", json_number(p.nll)},
              {"crps", json_number(p.crps)},
              {"icp", pairs_to_json(p.icp)}};
}

ProbMetrics prob_from_json(const json& j) {
  ProbMetrics p;
  p.nll = number_or_nan(j.at("nll"));
  p.crps = number_or_nan(j.at("crps"));
  p.icp = pairs_from_json(j.at("icp"));
  return p;
}

json dist_to_json(const DistributionReport& d) {
  return json{{"mean_rel_diff", json_number(d.mean_rel_diff)},
              {"mean_rel_defined", d.mean_rel_defined},
              {"cv_diff", json_number(d.cv_diff)},
              {"cv_defined", d.cv_defined},
              {"wasserstein", json_number(d.wasserstein)},
              {"ks_stat", d.ks_stat},
              {"ks_p", d.ks_p},
              {"mwu_stat", d.mwu_stat},
              {"mwu_p", d.mwu_p},
              {"similar_ks", d.similar_ks},
              {"similar_mwu", d.similar_mwu}};
}

DistributionReport dist_from_json(const json& j) {
  DistributionReport d;
  d.mean_rel_diff = number_or_nan(j.at("mean_rel_diff"));
  d.mean_rel_defined = j.at("mean_rel_defined").get<bool>();
  d.cv_diff = number_or_nan(j.at("cv_diff"));
  d.cv_defined = j.at("cv_defined").get<bool>();
  d.wasserstein = j.at("wasserstein").get<double>();
  d.ks_stat = j.at("ks_stat").get<double>();
  d.ks_p = j.at("ks_p").get<double>();
  d.mwu_stat = j.at("mwu_stat").get<double>();
  d.mwu_p = j.at("mwu_p").get<double>();
  d.similar_ks = j.at("similar_ks").get<bool>();
  d.similar_mwu = j.at("similar_mwu").get<bool>();
  return d;
}

json dowqq_to_json(const DowQqReport& d) {
  json obs = json::array();
  json imp = json::array();
  for (int i = 0; i < 7; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    obs.push_back(d.dow_mean_observed[idx] ? json(*d.dow_mean_observed[idx])
                                           : json(nullptr));
    imp.push_back(d.dow_mean_imputed[idx] ? json(*d.dow_mean_imputed[idx])
                                          : json(nullptr));
  }
  json qq = json::array();
  for (const auto& row : d.qq) {
    qq.push_back(json::array({row[0], row[1], row[2]}));
  }
  return json{{"dow_observed", obs}, {"dow_imputed", imp}, {"qq", qq}};
}

DowQqReport dowqq_from_json(const json& j) {
  DowQqReport d;
  for (std::size_t i = 0; i < 7; ++i) {
    const json& o = j.at("dow_observed")[i];
    const json& m = j.at("dow_imputed")[i];
    if (!o.is_null()) d.dow_mean_observed[i] = o.get<double>();
    if (!m.is_null()) d.dow_mean_imputed[i] = m.get<double>();
  }
  for (const auto& row : j.at("qq")) {
    d.qq.push_back({row[0].get<double>(), row[1].get<double>(),
                    row[2].get<double>()});
  }
  return d;
}

json forecaster_to_json(const ForecasterImpact& f) {
  return json{{"mae_raw", f.mae_raw},
              {"mae_imputed", f.mae_imputed},
              {"mse_raw", f.mse_raw},
              {"mse_imputed", f.mse_imputed},
              {"delta_mae_pct", f.delta_mae_pct},
              {"delta_mse_pct", f.delta_mse_pct},
              {"zero_baseline", f.zero_baseline},
              {"n_eval_raw", f.n_eval_raw},
              {"n_eval_imputed", f.n_eval_imputed}};
}

ForecasterImpact forecaster_from_json(const json& j) {
  ForecasterImpact f;
  f.mae_raw = j.at("mae_raw").get<double>();
  f.mae_imputed = j.at("mae_imputed").get<double>();
  f.mse_raw = j.at("mse_raw").get<double>();
  f.mse_imputed = j.at("mse_imputed").get<double>();
  f.delta_mae_pct = j.at("delta_mae_pct").get<double>();
  f.delta_mse_pct = j.at("delta_mse_pct").get<double>();
  f.zero_baseline = j.at("zero_baseline").get<bool>();
  f.n_eval_raw = j.at("n_eval_raw").get<std::size_t>();
  f.n_eval_imputed = j.at("n_eval_imputed").get<std::size_t>();
  return f;
}

json station_to_json(const StationEvaluation& s) {
  json j;
  j["station_id"] = s.station_id;
  j["n_imputed"] = s.n_imputed;
  j["n_scored"] = s.n_scored;
  j["n_unreachable"] = s.n_unreachable;
  j["n_clamped"] = s.n_clamped;
  j["mae_kwh"] = s.mae_kwh ? json(*s.mae_kwh) : json(nullptr);
  j["prob"] = s.prob ? prob_to_json(*s.prob) : json(nullptr);
  j["calibration"] = pairs_to_json(s.calibration);
  j["dist"] = s.dist ? dist_to_json(*s.dist) : json(nullptr);
  j["dowqq"] = s.dowqq ? dowqq_to_json(*s.dowqq) : json(nullptr);
  if (s.forecast) {
    j["forecast"] =
        json{{"seasonal_naive", forecaster_to_json(s.forecast->seasonal_naive)},
             {"ridge_ar", forecaster_to_json(s.forecast->ridge_ar)}};
  } else {
    j["forecast"] = nullptr;
  }
  return j;
}

StationEvaluation station_from_json(const json& j) {
  StationEvaluation s;
  s.station_id = j.at("station_id").get<std::string>();
  s.n_imputed = j.at("n_imputed").get<std::size_t>();
  s.n_scored = j.at("n_scored").get<std::size_t>();
  s.n_unreachable = j.at("n_unreachable").get<std::size_t>();
  s.n_clamped = j.at("n_clamped").get<std::size_t>();
  if (!j.at("mae_kwh").is_null()) s.mae_kwh = j.at("mae_kwh").get<double>();
  if (!j.at("prob").is_null()) s.prob = prob_from_json(j.at("prob"));
  s.calibration = pairs_from_json(j.at("calibration"));
  if (!j.at("dist").is_null()) s.dist = dist_from_json(j.at("dist"));
  if (!j.at("dowqq").is_null()) s.dowqq = dowqq_from_json(j.at("dowqq"));
  if (!j.at("forecast").is_null()) {
    ForecastImpact f;
    f.seasonal_naive =
        forecaster_from_json(j.at("forecast").at("seasonal_naive"));
    f.ridge_ar = forecaster_from_json(j.at("forecast").at("ridge_ar"));
    s.forecast = f;
  }
  return s;
}

// The per-day material evaluate_station gathers before metric calls.
struct ScoredData {
  std::vector<double> pred_kwh;
  std::vector<double> truth_kwh;
  std::vector<double> mu_norm;
  std::vector<double> var_norm;
  std::vector<double> truth_norm;
  std::vector<double> observed_values;
  std::vector<DatedValue> observed_dated;
  std::vector<DatedValue> imputed_dated;
};

ScoredData collect(const ImputationResult& prediction,
                   const DailyDemandSeries& truth) {
  ScoredData d;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const ImputedDay& day = prediction.days[i];
    const bool truth_observed = truth.missing[i] == 0;
    if (truth_observed && !day.was_imputed) {
      // The reference sample is what imputation could actually see; truths
      // of masked days stay on the imputed side of the comparison.
      d.observed_values.push_back(truth.demand[i]);
      d.observed_dated.push_back({day.date, truth.demand[i]});
    }
    if (!day.was_imputed) continue;
    d.imputed_dated.push_back({day.date, day.value});
    if (!truth_observed) continue;
    d.pred_kwh.push_back(day.value);
    d.truth_kwh.push_back(truth.demand[i]);
    if (day.var_norm > 0.0) {
      d.mu_norm.push_back(day.mu_norm);
      d.var_norm.push_back(day.var_norm);
      d.truth_norm.push_back((truth.demand[i] - day.norm_mean) /
                             std::max(day.norm_std, kNormEpsilon));
    }
  }
  return d;
}

ForecasterImpact mean_forecaster(const std::vector<ForecasterImpact>& parts) {
  ForecasterImpact out;
  const double n = static_cast<double>(parts.size());
  for (const ForecasterImpact& p : parts) {
    out.mae_raw += p.mae_raw / n;
    out.mae_imputed += p.mae_imputed / n;
    out.mse_raw += p.mse_raw / n;
    out.mse_imputed += p.mse_imputed / n;
    out.delta_mae_pct += p.delta_mae_pct / n;
    out.delta_mse_pct += p.delta_mse_pct / n;
    out.zero_baseline = out.zero_baseline || p.zero_baseline;
    out.n_eval_raw += p.n_eval_raw;
    out.n_eval_imputed += p.n_eval_imputed;
  }
  return out;
}

std::vector<std::size_t> iota_index(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

StationEvaluation score(const std::string& station_id, const ScoredData& d,
                        std::size_t n_imputed, std::size_t n_unreachable,
                        std::size_t n_clamped) {
  StationEvaluation s;
  s.station_id = station_id;
  s.n_imputed = n_imputed;
  s.n_scored = d.pred_kwh.size();
  s.n_unreachable = n_unreachable;
  s.n_clamped = n_clamped;
  if (!d.pred_kwh.empty()) {
    s.mae_kwh = mae(d.pred_kwh, d.truth_kwh, iota_index(d.pred_kwh.size()));
  }
  if (!d.mu_norm.empty()) {
    s.prob = prob_metrics(d.mu_norm, d.var_norm, d.truth_norm,
                          iota_index(d.mu_norm.size()),
                          default_calibration_levels());
    s.calibration = calibration_curve(d.mu_norm, d.var_norm, d.truth_norm);
  }
  if (!d.observed_values.empty() && !d.imputed_dated.empty()) {
    std::vector<double> imputed_values;
    imputed_values.reserve(d.imputed_dated.size());
    for (const DatedValue& v : d.imputed_dated) {
      imputed_values.push_back(v.value);
    }
    s.dist = dist_compare(d.observed_values, imputed_values);
  }
  if (!d.observed_dated.empty() && !d.imputed_dated.empty()) {
    s.dowqq = dow_profile_and_qq(d.observed_dated, d.imputed_dated);
  }
  return s;
}

std::string csv_cell(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

}  // namespace

StationEvaluation evaluate_station(const ImputationResult& prediction,
                                   const DailyDemandSeries& truth) {
  if (prediction.station_id != truth.station_id) {
    throw ValidationError("prediction is for station " +
                          prediction.station_id + ", truth for " +
                          truth.station_id);
  }
  if (prediction.days.size() != truth.size() ||
      (truth.size() > 0 && prediction.days.front().date != truth.start_date)) {
    throw ValidationError("prediction and truth for " + truth.station_id +
                          " cover different days");
  }
  const ScoredData d = collect(prediction, truth);
  std::size_t n_imputed = 0;
  std::size_t n_clamped = 0;
  for (const ImputedDay& day : prediction.days) {
    if (day.was_imputed) ++n_imputed;
    if (day.clamped) ++n_clamped;
  }
  StationEvaluation s = score(truth.station_id, d, n_imputed,
                              prediction.unreachable.size(), n_clamped);

  DailyDemandSeries gappy = truth;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (prediction.days[i].was_imputed || truth.missing[i]) {
      gappy.missing[i] = 1;
      gappy.demand[i] = 0.0;
    }
  }
  try {
    s.forecast = forecast_impact(gappy, prediction.to_series());
  } catch (const ValidationError&) {
    // Series too short or no fully observed lookback: leave absent.
  }
  return s;
}

EvaluationReport evaluate_imputations(
    const std::vector<ImputationResult>& predictions,
    const std::vector<DailyDemandSeries>& truths,
    const std::string& config_json) {
  std::map<std::string, const DailyDemandSeries*> truth_by_station;
  for (const DailyDemandSeries& t : truths) {
    truth_by_station[t.station_id] = &t;
  }
  std::map<std::string, const ImputationResult*> pred_by_station;
  for (const ImputationResult& p : predictions) {
    if (!pred_by_station.emplace(p.station_id, &p).second) {
      throw ValidationError("duplicate prediction for station " +
                            p.station_id);
    }
  }

  EvaluationReport report;
  report.config_json = config_json.empty() ? "{}" : config_json;
  ScoredData pooled_data;
  std::size_t pooled_imputed = 0;
  std::size_t pooled_unreachable = 0;
  std::size_t pooled_clamped = 0;
  std::vector<ForecasterImpact> naive_parts;
  std::vector<ForecasterImpact> ridge_parts;

  for (const auto& [station_id, pred] : pred_by_station) {
    const auto it = truth_by_station.find(station_id);
    if (it == truth_by_station.end()) {
      throw ValidationError("no truth series for station " + station_id);
    }
    StationEvaluation s = evaluate_station(*pred, *it->second);
    const ScoredData d = collect(*pred, *it->second);
    pooled_data.pred_kwh.insert(pooled_data.pred_kwh.end(),
                                d.pred_kwh.begin(), d.pred_kwh.end());
    pooled_data.truth_kwh.insert(pooled_data.truth_kwh.end(),
                                 d.truth_kwh.begin(), d.truth_kwh.end());
    pooled_data.mu_norm.insert(pooled_data.mu_norm.end(), d.mu_norm.begin(),
                               d.mu_norm.end());
    pooled_data.var_norm.insert(pooled_data.var_norm.end(),
                                d.var_norm.begin(), d.var_norm.end());
    pooled_data.truth_norm.insert(pooled_data.truth_norm.end(),
                                  d.truth_norm.begin(), d.truth_norm.end());
    pooled_data.observed_values.insert(pooled_data.observed_values.end(),
                                       d.observed_values.begin(),
                                       d.observed_values.end());
    pooled_data.observed_dated.insert(pooled_data.observed_dated.end(),
                                      d.observed_dated.begin(),
                                      d.observed_dated.end());
    pooled_data.imputed_dated.insert(pooled_data.imputed_dated.end(),
                                     d.imputed_dated.begin(),
                                     d.imputed_dated.end());
    pooled_imputed += s.n_imputed;
    pooled_unreachable += s.n_unreachable;
    pooled_clamped += s.n_clamped;
    if (s.forecast) {
      naive_parts.push_back(s.forecast->seasonal_naive);
      ridge_parts.push_back(s.forecast->ridge_ar);
    }
    report.stations.push_back(std::move(s));
  }

  report.pooled = score("all", pooled_data, pooled_imputed,
                        pooled_unreachable, pooled_clamped);
  if (!naive_parts.empty()) {
    ForecastImpact f;
    f.seasonal_naive = mean_forecaster(naive_parts);
    f.ridge_ar = mean_forecaster(ridge_parts);
    report.pooled.forecast = f;
  }
  return report;
}

std::string report_to_json(const EvaluationReport& report) {
  json j;
  j["config"] = json::parse(report.config_json);
  j["pooled"] = station_to_json(report.pooled);
  json stations = json::array();
  for (const StationEvaluation& s : report.stations) {
    stations.push_back(station_to_json(s));
  }
  j["stations"] = stations;
  return j.dump(2) + "\n";
}

EvaluationReport report_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ValidationError("evaluation report is not a JSON object");
  }
  EvaluationReport report;
  report.config_json = j.at("config").dump();
  report.pooled = station_from_json(j.at("pooled"));
  for (const auto& s : j.at("stations")) {
    report.stations.push_back(station_from_json(s));
  }
  return report;
}

void write_report_tables(const EvaluationReport& report,
                         const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto path = [&dir](const char* name) {
    return (std::filesystem::path(dir) / name).string();
  };
  std::vector<const StationEvaluation*> rows;
  rows.push_back(&report.pooled);
  for (const StationEvaluation& s : report.stations) rows.push_back(&s);

  std::string metrics =
      "station_id,n_imputed,n_scored,n_unreachable,n_clamped,mae_kwh,nll,"
      "crps\n";
  for (const StationEvaluation* s : rows) {
    metrics += s->station_id + ',' + std::to_string(s->n_imputed) + ',' +
               std::to_string(s->n_scored) + ',' +
               std::to_string(s->n_unreachable) + ',' +
               std::to_string(s->n_clamped) + ',' + csv_cell(s->mae_kwh) + ',';
    metrics += s->prob ? format_double(s->prob->nll) : std::string();
    metrics += ',';
    metrics += s->prob ? format_double(s->prob->crps) : std::string();
    metrics += '\n';
  }
  write_text_file(path("metrics.csv"), metrics);

  std::string calib = "station_id,alpha,coverage\n";
  for (const StationEvaluation* s : rows) {
    for (const auto& [alpha, coverage] : s->calibration) {
      calib += s->station_id + ',' + format_double(alpha) + ',' +
               format_double(coverage) + '\n';
    }
  }
  write_text_file(path("calibration.csv"), calib);

  std::string dist =
      "station_id,mean_rel_diff,cv_diff,wasserstein,ks_stat,ks_p,mwu_stat,"
      "mwu_p,similar_ks,similar_mwu\n";
  for (const StationEvaluation* s : rows) {
    if (!s->dist) continue;
    const DistributionReport& d = *s->dist;
    dist += s->station_id + ',';
    dist += d.mean_rel_defined ? format_double(d.mean_rel_diff)
                               : std::string();
    dist += ',';
    dist += d.cv_defined ? format_double(d.cv_diff) : std::string();
    dist += ',' + format_double(d.wasserstein) + ',' +
            format_double(d.ks_stat) + ',' + format_double(d.ks_p) + ',' +
            format_double(d.mwu_stat) + ',' + format_double(d.mwu_p) + ',' +
            (d.similar_ks ? "1" : "0") + ',' + (d.similar_mwu ? "1" : "0") +
            '\n';
  }
  write_text_file(path("distribution.csv"), dist);

  std::string dow = "station_id,day,observed_mean,imputed_mean\n";
  for (const StationEvaluation* s : rows) {
    if (!s->dowqq) continue;
    for (int day = 0; day < 7; ++day) {
      const auto idx = static_cast<std::size_t>(day);
      dow += s->station_id + ',' + weekday_name(day) + ',';
      dow += s->dowqq->dow_mean_observed[idx]
                 ? format_double(*s->dowqq->dow_mean_observed[idx])
                 : std::string();
      dow += ',';
      dow += s->dowqq->dow_mean_imputed[idx]
                 ? format_double(*s->dowqq->dow_mean_imputed[idx])
                 : std::string();
      dow += '\n';
    }
  }
  write_text_file(path("dow.csv"), dow);

  std::string qq = "station_id,percent,observed,imputed\n";
  for (const StationEvaluation* s : rows) {
    if (!s->dowqq) continue;
    for (const auto& row : s->dowqq->qq) {
      qq += s->station_id + ',' + format_double(row[0]) + ',' +
            format_double(row[1]) + ',' + format_double(row[2]) + '\n';
    }
  }
  write_text_file(path("qq.csv"), qq);

  std::string fc =
      "station_id,forecaster,mae_raw,mae_imputed,mse_raw,mse_imputed,"
      "delta_mae_pct,delta_mse_pct,zero_baseline,n_eval_raw,n_eval_imputed\n";
  const auto fc_row = [&fc](const std::string& station, const char* name,
                            const ForecasterImpact& f) {
    fc += station + ',' + name + ',' + format_double(f.mae_raw) + ',' +
          format_double(f.mae_imputed) + ',' + format_double(f.mse_raw) +
          ',' + format_double(f.mse_imputed) + ',' +
          format_double(f.delta_mae_pct) + ',' +
          format_double(f.delta_mse_pct) + ',' +
          (f.zero_baseline ? "1" : "0") + ',' + std::to_string(f.n_eval_raw) +
          ',' + std::to_string(f.n_eval_imputed) + '\n';
  };
  for (const StationEvaluation* s : rows) {
    if (!s->forecast) continue;
    fc_row(s->station_id, "seasonal_naive", s->forecast->seasonal_naive);
    fc_row(s->station_id, "ridge_ar", s->forecast->ridge_ar);
  }
  write_text_file(path("forecast.csv"), fc);
}

void write_report_plots(const EvaluationReport& report,
                        const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto path = [&dir](const char* name) {
    return (std::filesystem::path(dir) / name).string();
  };

  std::vector<plot::Series> calib;
  const auto add_calibration = [&calib](const StationEvaluation& s) {
    if (s.calibration.empty()) return;
    plot::Series series;
    series.label = s.station_id;
    for (const auto& [alpha, coverage] : s.calibration) {
      series.x.push_back(alpha);
      series.y.push_back(coverage);
    }
    calib.push_back(std::move(series));
  };
  add_calibration(report.pooled);
  for (const StationEvaluation& s : report.stations) add_calibration(s);
  plot::LineChartOptions calib_opts;
  calib_opts.title = "Interval calibration";
  calib_opts.x_label = "nominal coverage";
  calib_opts.y_label = "empirical coverage";
  calib_opts.diagonal = true;
  calib_opts.markers = true;
  write_text_file(path("calibration.svg"), line_chart(calib, calib_opts));

  std::vector<plot::Series> dow;
  if (report.pooled.dowqq) {
    plot::Series obs;
    obs.label = "observed";
    plot::Series imp;
    imp.label = "imputed";
    for (int day = 0; day < 7; ++day) {
      const auto idx = static_cast<std::size_t>(day);
      if (report.pooled.dowqq->dow_mean_observed[idx]) {
        obs.x.push_back(day);
        obs.y.push_back(*report.pooled.dowqq->dow_mean_observed[idx]);
      }
      if (report.pooled.dowqq->dow_mean_imputed[idx]) {
        imp.x.push_back(day);
        imp.y.push_back(*report.pooled.dowqq->dow_mean_imputed[idx]);
      }
    }
    dow.push_back(std::move(obs));
    dow.push_back(std::move(imp));
  }
  plot::LineChartOptions dow_opts;
  dow_opts.title = "Weekly demand profile";
  dow_opts.x_label = "day of week (0 = Monday)";
  dow_opts.y_label = "mean demand (kWh)";
  dow_opts.markers = true;
  write_text_file(path("dow_profile.svg"), line_chart(dow, dow_opts));

  std::vector<plot::Series> qq;
  if (report.pooled.dowqq) {
    plot::Series series;
    series.label = "quantiles";
    for (const auto& row : report.pooled.dowqq->qq) {
      series.x.push_back(row[1]);
      series.y.push_back(row[2]);
    }
    qq.push_back(std::move(series));
  }
  plot::LineChartOptions qq_opts;
  qq_opts.title = "Observed vs imputed quantiles";
  qq_opts.x_label = "observed (kWh)";
  qq_opts.y_label = "imputed (kWh)";
  qq_opts.diagonal = true;
  qq_opts.markers = true;
  write_text_file(path("qq.svg"), line_chart(qq, qq_opts));

  plot::GroupedBars bars;
  std::vector<double> values;
  for (const StationEvaluation& s : report.stations) {
    if (!s.mae_kwh) continue;
    bars.categories.push_back(s.station_id);
    values.push_back(*s.mae_kwh);
  }
  bars.groups.emplace_back("model", values);
  write_text_file(
      path("mae_by_station.svg"),
      bar_chart(bars, "Imputation error by station", "station", "MAE (kWh)"));
}

}  // namespace praim
