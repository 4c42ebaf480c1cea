#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "praim/features.hpp"
#include "praim/ingest.hpp"

namespace praim {

// PoI lines rendered into a prompt are capped to keep prompts bounded.
inline constexpr std::size_t kMaxPromptPois = 10;

struct PromptInputs {
  std::string station_id;
  std::vector<double> demand_raw;
  std::vector<std::uint8_t> mask;  // 1 = render the value as [MISSING]
  CalendarFeatures calendar;       // anchor day
  StationLocation location;
  std::vector<Poi> pois;
};

// The six prompt fields in fixed order. Placeholders: {station_id},
// {window_len}, {demand_values}, {mask_vector}, {calendar}, {coordinates},
// {pois}.
std::string default_prompt_template();

// Deterministic text; masked demand values never appear, they render as
// [MISSING]. Coordinates use 5 decimal places; an empty PoI set renders the
// fixed fallback line.
std::string build_prompt(const PromptInputs& inputs,
                         const std::string& template_text);

PromptInputs prompt_inputs_from(const WindowSample& sample,
                                const StationContext& context);

// Cache/corpus key: "station_id|YYYY-MM-DD" of the window anchor.
std::string make_embedding_key(const std::string& station_id,
                               const Date& anchor_date);

}  // namespace praim
