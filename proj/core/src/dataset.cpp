#include "praim/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "praim/common.hpp"
#include "praim/masks.hpp"
#include "praim/rng.hpp"

namespace praim {

std::vector<WindowSample> assemble_training_samples(
    const std::vector<RawWindow>& windows, const std::vector<double>& rates,
    std::uint64_t mask_seed) {
  if (rates.empty()) {
    throw ValidationError("mask rate sweep must not be empty");
  }
  SplitRng rng(mask_seed);
  std::vector<WindowSample> samples;
  samples.reserve(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const RawWindow& w = windows[i];
    if (!w.curated) {
      throw ValidationError("window " + w.station_id + "|" +
                            to_string(w.anchor_date) +
                            " has real gaps and cannot be a training sample");
    }
    const double rate = rates[i % rates.size()];
    const auto mask =
        gen_mask_random(static_cast<int>(w.demand_raw.size()), rate, rng);
    samples.push_back(make_window_sample(w, mask));
  }
  return samples;
}

namespace {

std::size_t train_count_for(double ratio, std::size_t n) {
  auto count = static_cast<std::size_t>(
      std::floor(ratio * static_cast<double>(n)));
  return std::clamp<std::size_t>(count, 1, n - 1);
}

}  // namespace

SplitIndices split_dataset(const std::vector<WindowSample>& samples,
                           double ratio, std::uint64_t seed,
                           bool chronological) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw ValidationError("split ratio must lie in (0, 1), got " +
                          format_double(ratio));
  }
  const std::size_t n = samples.size();
  if (n < 2) {
    throw ValidationError("cannot split fewer than 2 samples");
  }

  SplitIndices out;
  if (chronological) {
    // Station groups keep their input order, which is anchor-ascending.
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) {
      groups[samples[i].station_id].push_back(i);
    }
    for (auto& [station, idx] : groups) {
      std::stable_sort(idx.begin(), idx.end(),
                       [&](std::size_t a, std::size_t b) {
                         return samples[a].anchor_date < samples[b].anchor_date;
                       });
      if (idx.size() == 1) {
        out.train.push_back(idx[0]);
        continue;
      }
      const std::size_t tc = train_count_for(ratio, idx.size());
      for (std::size_t j = 0; j < idx.size(); ++j) {
        (j < tc ? out.train : out.test).push_back(idx[j]);
      }
    }
  } else {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    SplitRng rng(seed);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const std::size_t j = i + rng.next_index(n - i);
      std::swap(order[i], order[j]);
    }
    const std::size_t tc = train_count_for(ratio, n);
    out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(tc));
    out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(tc), order.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  if (out.test.empty()) {
    throw ValidationError("split produced an empty test set");
  }
  return out;
}

std::vector<std::string> station_index(
    const std::vector<WindowSample>& samples) {
  std::vector<std::string> ids;
  for (const WindowSample& s : samples) ids.push_back(s.station_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

}  // namespace praim
