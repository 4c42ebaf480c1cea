#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "praim/config.hpp"
#include "praim/dates.hpp"

namespace praim {

struct ChargingSession {
  std::string station_id;
  UtcTime start_time{0};
  double duration_min = 0.0;
  double energy_kwh = 0.0;
  double lat = 0.0;
  double lon = 0.0;

  bool operator==(const ChargingSession&) const = default;
};

struct SessionParseResult {
  std::vector<ChargingSession> sessions;  // file order, duplicates removed
  std::size_t duplicates_dropped = 0;     // identical-all-field rows
};

// CSV with header {station_id, start_time, duration_min, energy_kwh, lat,
// lon} in any order. Timestamps must carry a zone designator; rows that
// repeat every field are dropped and counted.
SessionParseResult parse_sessions(std::string_view csv_text);

// Canonical serialization: UTC-normalized timestamps, shortest round-trip
// numerals. parse(serialize(parse(x))) reproduces every field value.
std::string sessions_to_csv(const std::vector<ChargingSession>& sessions);

struct DailyDemandSeries {
  std::string station_id;
  Date start_date;
  Date end_date;  // inclusive
  std::vector<double> demand;          // kWh per day
  std::vector<std::uint8_t> missing;   // 1 = day has no recorded session

  std::size_t size() const { return demand.size(); }
  Date date_at(std::size_t index) const {
    return add_days(start_date, static_cast<std::int64_t>(index));
  }
  double missing_rate() const;
};

struct CalendarFeatures {
  int day_of_week = 0;   // 0 = Monday .. 6 = Sunday
  int day_of_month = 1;  // 1..31
  int month = 1;         // 1..12
};

CalendarFeatures calendar_of(const Date& d);

// Sums session energy into UTC-day bins over [start, end]. A day with at
// least one session is observed even at zero energy; sessions outside the
// range are ignored. All sessions must belong to station_id.
DailyDemandSeries aggregate_daily(const std::vector<ChargingSession>& sessions,
                                  const std::string& station_id,
                                  const Date& start, const Date& end);

struct StationFilterEntry {
  std::string station_id;
  double missing_rate = 0.0;
  bool retained = false;
};

// Retained iff missing_rate ≤ tau; input order preserved.
std::vector<std::string> filter_stations(
    const std::vector<DailyDemandSeries>& series_set, double tau);
std::vector<StationFilterEntry> filter_entries(
    const std::vector<DailyDemandSeries>& series_set, double tau);

struct Poi {
  std::string name;
  std::string category;
  double distance_km = 0.0;
};

struct StationLocation {
  double lat = 0.0;
  double lon = 0.0;
};

struct StationContext {
  std::string station_id;
  StationLocation location;
  std::vector<Poi> pois;  // every entry within the configured radius
};

// CSV schema: station_id,name,category,distance_km. Rows beyond radius_km
// are dropped.
std::map<std::string, std::vector<Poi>> parse_pois_csv(std::string_view text,
                                                       double radius_km);
std::string pois_to_csv(const std::map<std::string, std::vector<Poi>>& pois);

// Resolves PoIs for each station: remote endpoint when configured (with
// write-through to the local CSV cache), otherwise the local file; remote
// failures fall back to the file when one exists. Empty source yields empty
// contexts.
std::map<std::string, StationContext> load_pois(
    const PoiConfig& cfg,
    const std::map<std::string, StationLocation>& locations);

// (1-delta)^((C+1)(T+H)): chance that a lookback-T, horizon-H sample with C
// neighbor series survives i.i.d. missingness delta.
double usable_sample_probability(double delta, int lookback_days,
                                 int horizon_days, int neighbor_count);

// Per-station series file: header station_id,date,demand_kwh,missing with
// one contiguous row per day.
void write_series_csv(const DailyDemandSeries& series,
                      const std::string& path);
DailyDemandSeries read_series_csv(const std::string& path);

// All *.csv under dir except the stations.csv/pois.csv metadata files,
// sorted by station id for deterministic iteration.
std::vector<DailyDemandSeries> load_series_dir(const std::string& dir);

}  // namespace praim
