#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "praim/features.hpp"

namespace praim {

// One supervised sample per curated window. The mask rate cycles through
// `rates` in window order, so a long sweep list exposes every missingness
// level; the seed pins the masked positions.
std::vector<WindowSample> assemble_training_samples(
    const std::vector<RawWindow>& windows, const std::vector<double>& rates,
    std::uint64_t mask_seed);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Deterministic partition into train/test. Default mode shuffles sample
// indices with the seed and floors the train share (clamped so both sides
// stay non-empty). Chronological mode instead takes each station's earliest
// samples for training.
SplitIndices split_dataset(const std::vector<WindowSample>& samples,
                           double ratio, std::uint64_t seed,
                           bool chronological = false);

// Sorted unique station ids; the position of a station id is its row in the
// model's station embedding table.
std::vector<std::string> station_index(
    const std::vector<WindowSample>& samples);

}  // namespace praim
