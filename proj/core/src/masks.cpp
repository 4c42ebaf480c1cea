#include "praim/masks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "praim/common.hpp"

namespace praim {

std::vector<std::uint8_t> gen_mask_random(int length, double rate,
                                          SplitRng& rng) {
  if (length < 2) {
    throw ValidationError("mask length must be at least 2, got " +
                          std::to_string(length));
  }
  if (!(rate > 0.0 && rate < 1.0)) {
    throw ValidationError("mask rate must lie in (0, 1), got " +
                          format_double(rate));
  }
  const auto raw = static_cast<int>(std::floor(rate * length));
  const int n = std::clamp(raw, 1, length - 1);

  std::vector<int> positions(static_cast<std::size_t>(length));
  std::iota(positions.begin(), positions.end(), 0);
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(length), 0);
  for (int i = 0; i < n; ++i) {
    const auto j =
        i + static_cast<int>(rng.next_index(static_cast<std::size_t>(length - i)));
    std::swap(positions[static_cast<std::size_t>(i)],
              positions[static_cast<std::size_t>(j)]);
    mask[static_cast<std::size_t>(positions[static_cast<std::size_t>(i)])] = 1;
  }
  return mask;
}

namespace {

struct GapRun {
  std::size_t start = 0;
  std::size_t length = 0;
};

std::vector<GapRun> missing_runs(const std::vector<std::uint8_t>& missing) {
  std::vector<GapRun> runs;
  std::size_t i = 0;
  while (i < missing.size()) {
    if (!missing[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < missing.size() && missing[j]) ++j;
    runs.push_back({i, j - i});
    i = j;
  }
  return runs;
}

}  // namespace

MissingnessProfile fit_missingness_profile(
    const std::vector<DailyDemandSeries>& series) {
  MissingnessProfile profile;
  std::map<int, std::size_t> length_counts;
  std::array<std::size_t, 7> dow_counts{};
  std::array<std::size_t, 12> month_counts{};
  std::map<int, std::size_t> spacing_counts;
  std::size_t total_gaps = 0;
  std::size_t total_spacings = 0;

  for (const DailyDemandSeries& s : series) {
    const auto runs = missing_runs(s.missing);
    for (std::size_t r = 0; r < runs.size(); ++r) {
      const Date start = s.date_at(runs[r].start);
      ++length_counts[static_cast<int>(runs[r].length)];
      ++dow_counts[static_cast<std::size_t>(day_of_week(start))];
      ++month_counts[static_cast<std::size_t>(start.month - 1)];
      ++total_gaps;
      if (r > 0) {
        const auto spacing = static_cast<int>(
            runs[r].start - runs[r - 1].start - runs[r - 1].length);
        ++spacing_counts[spacing];
        ++total_spacings;
      }
    }
  }
  if (total_gaps == 0) {
    throw ValidationError(
        "no gaps in any input series; a missingness profile cannot be "
        "fitted, use random masks instead");
  }

  const auto gap_total = static_cast<double>(total_gaps);
  for (const auto& [len, count] : length_counts) {
    profile.gap_length_pmf[len] = static_cast<double>(count) / gap_total;
  }
  for (std::size_t d = 0; d < 7; ++d) {
    profile.dow_weights[d] = static_cast<double>(dow_counts[d]) / gap_total;
  }
  for (std::size_t m = 0; m < 12; ++m) {
    profile.seasonal_weights[m] =
        static_cast<double>(month_counts[m]) / gap_total;
  }
  for (const auto& [spacing, count] : spacing_counts) {
    profile.spacing_pmf[spacing] =
        static_cast<double>(count) / static_cast<double>(total_spacings);
  }
  return profile;
}

namespace {

int sample_gap_length(const std::map<int, double>& pmf, SplitRng& rng) {
  const double u = rng.next_double();
  double cum = 0.0;
  int last = pmf.begin()->first;
  for (const auto& [len, p] : pmf) {
    cum += p;
    last = len;
    if (u < cum) return len;
  }
  return last;
}

}  // namespace

DmMaskResult gen_mask_dm(const MissingnessProfile& profile, int length,
                         const Date& start_date, double target_fraction,
                         SplitRng& rng, int max_retries) {
  if (length < 2) {
    throw ValidationError("mask length must be at least 2, got " +
                          std::to_string(length));
  }
  if (!(target_fraction > 0.0 && target_fraction <= 0.5)) {
    throw ValidationError("target fraction must lie in (0, 0.5], got " +
                          format_double(target_fraction));
  }
  if (profile.gap_length_pmf.empty()) {
    throw ValidationError("missingness profile has no gap lengths");
  }
  if (max_retries < 1) {
    throw ValidationError("max_retries must be positive");
  }

  // Calendar weight per candidate start position, with a prefix sum for
  // inverse-CDF sampling restricted to feasible starts.
  const auto n = static_cast<std::size_t>(length);
  std::vector<double> prefix(n + 1, 0.0);
  {
    Date day = start_date;
    for (std::size_t p = 0; p < n; ++p) {
      const double w =
          profile.dow_weights[static_cast<std::size_t>(day_of_week(day))] *
          profile.seasonal_weights[static_cast<std::size_t>(day.month - 1)];
      prefix[p + 1] = prefix[p] + w;
      day = add_days(day, 1);
    }
  }

  DmMaskResult result;
  result.mask.assign(n, 0);
  const auto target = static_cast<int>(std::llround(target_fraction * length));
  int placed = 0;

  // Blocks may overshoot the target by at most one day in total.
  while (placed < target) {
    bool block_placed = false;
    for (int attempt = 0; attempt < max_retries; ++attempt) {
      const int len = sample_gap_length(profile.gap_length_pmf, rng);
      if (len > length || placed + len > target + 1) continue;

      const auto last_start = n - static_cast<std::size_t>(len);
      const double total = prefix[last_start + 1];
      if (total <= 0.0) continue;
      const double u = rng.next_double() * total;
      const auto it = std::upper_bound(prefix.begin(),
                                       prefix.begin() +
                                           static_cast<std::ptrdiff_t>(last_start + 1),
                                       u);
      auto start = static_cast<std::size_t>(
          std::distance(prefix.begin(), it));
      if (start > 0) --start;  // prefix[start] <= u < prefix[start + 1]

      // Overlap or adjacency with an existing block rejects the proposal.
      const std::size_t lo = start == 0 ? 0 : start - 1;
      const std::size_t hi =
          std::min(n, start + static_cast<std::size_t>(len) + 1);
      bool clash = false;
      for (std::size_t p = lo; p < hi; ++p) {
        if (result.mask[p]) {
          clash = true;
          break;
        }
      }
      if (clash) continue;

      for (std::size_t p = start; p < start + static_cast<std::size_t>(len);
           ++p) {
        result.mask[p] = 1;
      }
      placed += len;
      block_placed = true;
      break;
    }
    if (!block_placed) {
      if (placed == 0) {
        throw ValidationError(
            "could not place any gap block after " +
            std::to_string(max_retries) +
            " attempts; target is infeasible for this profile");
      }
      result.shortfall = target - placed > 1;
      break;
    }
  }
  return result;
}

}  // namespace praim
