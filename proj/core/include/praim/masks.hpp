#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "praim/dates.hpp"
#include "praim/ingest.hpp"
#include "praim/rng.hpp"

namespace praim {

// Exactly clamp(floor(rate * length), 1, length - 1) positions set to 1,
// chosen uniformly without replacement. rate must lie in (0, 1).
std::vector<std::uint8_t> gen_mask_random(int length, double rate,
                                          SplitRng& rng);

/// Empirical missingness structure of real series: how long gaps are, which
/// calendar days they start on, and how far apart they sit.
struct MissingnessProfile {
  std::map<int, double> gap_length_pmf;  // exact run lengths in days
  std::array<double, 7> dow_weights{};   // gap-start day of week, 0 = Monday
  std::array<double, 12> seasonal_weights{};  // gap-start month
  // Observed days between consecutive gaps of one series. Empty when no
  // series has two gaps.
  std::map<int, double> spacing_pmf;
};

// Fits the profile from real gaps (maximal runs of missing days) across all
// series. A gap-free corpus cannot be fitted; use random masks instead.
MissingnessProfile fit_missingness_profile(
    const std::vector<DailyDemandSeries>& series);

struct DmMaskResult {
  std::vector<std::uint8_t> mask;
  bool shortfall = false;  // placement stalled before reaching the target
};

// Draws gap blocks from the profile's length distribution and places them at
// starts weighted by the day-of-week and seasonal frequencies, rejecting
// overlaps and adjacency (at least one observed day between blocks), until
// the masked day count is within one day of round(target_fraction * length).
// A block that cannot be placed within max_retries attempts either raises
// (nothing placed yet) or stops early with the shortfall flag set.
DmMaskResult gen_mask_dm(const MissingnessProfile& profile, int length,
                         const Date& start_date, double target_fraction,
                         SplitRng& rng, int max_retries = 1000);

}  // namespace praim
