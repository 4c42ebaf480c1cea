#include "praim/features.hpp"

#include <cmath>

#include "praim/common.hpp"

namespace praim {
namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

}  // namespace

NormalizedWindow normalize_window(const std::vector<double>& demand_raw,
                                  const std::vector<std::uint8_t>& mask) {
  const std::size_t n = demand_raw.size();
  if (n < 2) throw ValidationError("window length must be at least 2");
  if (mask.size() != n) {
    throw ValidationError("mask length does not match window length");
  }
  bool any_observed = false;
  for (auto m : mask) {
    if (m == 0) any_observed = true;
  }
  if (!any_observed) throw ValidationError("all-masked window");

  double sum = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    sum += mask[t] ? 0.0 : demand_raw[t];
  }
  const double mean = sum / static_cast<double>(n);
  double var = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double z = (mask[t] ? 0.0 : demand_raw[t]) - mean;
    var += z * z;
  }
  const double std = std::sqrt(var / static_cast<double>(n));
  const double scale = std::max(std, kNormEpsilon);

  NormalizedWindow out;
  out.mean = mean;
  out.std = std;
  out.demand_norm.resize(n);
  out.demand_masked_norm.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    out.demand_norm[t] = (demand_raw[t] - mean) / scale;
    out.demand_masked_norm[t] = mask[t] ? 0.0 : out.demand_norm[t];
  }
  return out;
}

std::array<double, 6> cyclical_encode(const CalendarFeatures& c) {
  const double dow = kTwoPi * c.day_of_week / 7.0;
  const double dom = kTwoPi * (c.day_of_month - 1) / 31.0;
  const double mon = kTwoPi * (c.month - 1) / 12.0;
  return {std::sin(dow), std::sin(dom), std::sin(mon),
          std::cos(dow), std::cos(dom), std::cos(mon)};
}

std::vector<double> denormalize(const std::vector<double>& values, double mean,
                                double std) {
  const double scale = std::max(std, kNormEpsilon);
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = values[i] * scale + mean;
  }
  return out;
}

std::vector<RawWindow> extract_windows(const DailyDemandSeries& series,
                                       int L) {
  if (L < 2) throw ValidationError("window length must be at least 2");
  std::vector<RawWindow> out;
  const std::size_t n = series.size();
  const std::size_t len = static_cast<std::size_t>(L);
  if (n < len) return out;
  out.reserve(n - len + 1);
  for (std::size_t anchor = len - 1; anchor < n; ++anchor) {
    RawWindow w;
    w.station_id = series.station_id;
    w.anchor = anchor;
    w.anchor_date = series.date_at(anchor);
    const std::size_t first = anchor + 1 - len;
    w.demand_raw.assign(series.demand.begin() + first,
                        series.demand.begin() + anchor + 1);
    w.real_missing.assign(series.missing.begin() + first,
                          series.missing.begin() + anchor + 1);
    w.curated = true;
    for (auto m : w.real_missing) {
      if (m) w.curated = false;
    }
    out.push_back(std::move(w));
  }
  return out;
}

WindowSample make_window_sample(const RawWindow& window,
                                const std::vector<std::uint8_t>& mask) {
  WindowSample s;
  s.station_id = window.station_id;
  s.anchor_date = window.anchor_date;
  s.demand_raw = window.demand_raw;
  s.mask = mask;
  auto norm = normalize_window(s.demand_raw, mask);
  s.demand_norm = std::move(norm.demand_norm);
  s.demand_masked_norm = std::move(norm.demand_masked_norm);
  s.norm_mean = norm.mean;
  s.norm_std = norm.std;
  s.calendar_encoded = cyclical_encode(calendar_of(window.anchor_date));
  for (std::size_t t = 0; t < mask.size(); ++t) {
    if (mask[t]) {
      s.masked_index.push_back(t);
      s.truth_norm.push_back(s.demand_norm[t]);
      s.truth_raw.push_back(s.demand_raw[t]);
    }
  }
  return s;
}

}  // namespace praim
