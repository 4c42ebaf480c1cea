#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "praim/config.hpp"
#include "praim/ingest.hpp"
#include "praim/masks.hpp"

namespace testkit {

/// One station of weekday-periodic demand: offset + amplitude *
/// sin(2*pi*dow/7) + Gaussian noise, fully observed.
praim::DailyDemandSeries sine_series(const std::string& station_id,
                                     double offset, double amplitude,
                                     double noise_sigma,
                                     const praim::Date& start, int n_days,
                                     std::uint64_t seed);

/// Four stations with offsets 25/35/45/55 kWh sharing the weekly shape.
std::vector<praim::DailyDemandSeries> sine_fleet(int n_days,
                                                 double noise_sigma,
                                                 std::uint64_t seed);

/// Hand-built blocky missingness: multi-day gaps, Monday/Tuesday starts,
/// regular spacing. Source profile for gap injection and mask comparisons.
praim::MissingnessProfile blocky_profile();

/// Punches profile-shaped gaps into a complete series.
praim::DailyDemandSeries with_gaps(const praim::DailyDemandSeries& complete,
                                   double fraction, std::uint64_t seed);

/// Config for the synthetic end-to-end runs: stub embeddings, a small model
/// and mask rates that hit every masked-count level of a 7-day window.
praim::Config small_config(int epochs);

void write_series_dir(const std::vector<praim::DailyDemandSeries>& fleet,
                      const std::string& dir);

}  // namespace testkit
