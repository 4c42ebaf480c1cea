#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "praim/ingest.hpp"

namespace praim {

// Guard on the per-window standard deviation; constant windows normalize to
// zero instead of dividing by zero.
inline constexpr double kNormEpsilon = 1e-8;

struct NormalizedWindow {
  std::vector<double> demand_norm;         // (raw - mean)/max(std, eps)
  std::vector<double> demand_masked_norm;  // masked positions forced to 0
  double mean = 0.0;
  double std = 0.0;  // population std of the zero-filled window
};

// Statistics are taken over the window with masked entries zero-filled, then
// the affine map is applied to the raw values, so targets at masked steps
// stay meaningful. At least one position must be unmasked.
NormalizedWindow normalize_window(const std::vector<double>& demand_raw,
                                  const std::vector<std::uint8_t>& mask);

// [sin_dow, sin_dom, sin_month, cos_dow, cos_dom, cos_month] with periods
// {7, 31, 12} and zero-based phases.
std::array<double, 6> cyclical_encode(const CalendarFeatures& c);

std::vector<double> denormalize(const std::vector<double>& values, double mean,
                                double std);

struct RawWindow {
  std::string station_id;
  std::size_t anchor = 0;  // index of the window's last day in the series
  Date anchor_date;
  std::vector<double> demand_raw;
  std::vector<std::uint8_t> real_missing;  // 1 = genuinely unobserved day
  bool curated = false;                    // no real gaps anywhere in the window
};

// One window per anchor day from L-1 on; shorter series yield none. Curated
// windows are eligible for supervised training; the rest only for real-gap
// imputation.
std::vector<RawWindow> extract_windows(const DailyDemandSeries& series, int L);

struct WindowSample {
  std::string station_id;
  Date anchor_date;
  std::vector<double> demand_raw;
  std::vector<std::uint8_t> mask;  // 1 = treated as missing
  std::vector<double> demand_norm;
  std::vector<double> demand_masked_norm;
  std::array<double, 6> calendar_encoded{};  // anchor-day encoding
  double norm_mean = 0.0;
  double norm_std = 0.0;
  std::vector<std::size_t> masked_index;
  std::vector<double> truth_norm;  // normalized demand at masked steps
  std::vector<double> truth_raw;   // original scale

  std::size_t length() const { return demand_raw.size(); }
};

// Assembles the full training/evaluation sample for a window under a mask.
// For non-curated windows the truth fields cover real gaps and are
// placeholders (raw zeros), not supervision targets.
WindowSample make_window_sample(const RawWindow& window,
                                const std::vector<std::uint8_t>& mask);

}  // namespace praim
