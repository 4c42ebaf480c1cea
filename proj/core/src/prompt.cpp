#include "praim/prompt.hpp"

#include <cstdio>

#include "praim/common.hpp"

namespace praim {
namespace {

void replace_all(std::string& text, std::string_view placeholder,
                 std::string_view value) {
  std::size_t pos = 0;
  while ((pos = text.find(placeholder, pos)) != std::string::npos) {
    text.replace(pos, placeholder.size(), value);
    pos += value.size();
  }
}

std::string format_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.5f", v);
  return std::string(buf);
}

}  // namespace

std::string default_prompt_template() {
  return
      "EV charging station {station_id}.\n"
      "Daily charging demand in kWh over the last {window_len} days: "
      "{demand_values}.\n"
      "Missing-day indicator (1 = missing): {mask_vector}.\n"
      "Last day of the window: {calendar}.\n"
      "Station coordinates: {coordinates}.\n"
      "Nearby points of interest:\n"
      "{pois}\n";
}

std::string build_prompt(const PromptInputs& inputs,
                         const std::string& template_text) {
  if (inputs.demand_raw.size() != inputs.mask.size()) {
    throw ValidationError("prompt demand and mask lengths differ");
  }

  std::string demand_values;
  std::string mask_vector;
  for (std::size_t t = 0; t < inputs.demand_raw.size(); ++t) {
    if (t > 0) {
      demand_values += ", ";
      mask_vector += ", ";
    }
    demand_values +=
        inputs.mask[t] ? "[MISSING]" : format_double(inputs.demand_raw[t]);
    mask_vector += inputs.mask[t] ? '1' : '0';
  }

  const std::string calendar =
      std::string(weekday_name(inputs.calendar.day_of_week)) + ", " +
      month_name(inputs.calendar.month) + " " +
      std::to_string(inputs.calendar.day_of_month);

  const std::string coordinates = "(" + format_coord(inputs.location.lat) +
                                  ", " + format_coord(inputs.location.lon) +
                                  ")";

  std::string pois;
  if (inputs.pois.empty()) {
    pois = "No nearby points of interest.";
  } else {
    const std::size_t count = std::min(inputs.pois.size(), kMaxPromptPois);
    for (std::size_t i = 0; i < count; ++i) {
      const Poi& p = inputs.pois[i];
      if (i > 0) pois += '\n';
      pois += p.category + ": " + p.name + " (" +
              format_double(p.distance_km) + " km)";
    }
  }

  std::string text = template_text;
  replace_all(text, "{station_id}", inputs.station_id);
  replace_all(text, "{window_len}", std::to_string(inputs.demand_raw.size()));
  replace_all(text, "{demand_values}", demand_values);
  replace_all(text, "{mask_vector}", mask_vector);
  replace_all(text, "{calendar}", calendar);
  replace_all(text, "{coordinates}", coordinates);
  replace_all(text, "{pois}", pois);
  return text;
}

PromptInputs prompt_inputs_from(const WindowSample& sample,
                                const StationContext& context) {
  PromptInputs inputs;
  inputs.station_id = sample.station_id;
  inputs.demand_raw = sample.demand_raw;
  inputs.mask = sample.mask;
  inputs.calendar = calendar_of(sample.anchor_date);
  inputs.location = context.location;
  inputs.pois = context.pois;
  return inputs;
}

std::string make_embedding_key(const std::string& station_id,
                               const Date& anchor_date) {
  return station_id + "|" + to_string(anchor_date);
}

}  // namespace praim
