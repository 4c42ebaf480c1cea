#include "praim/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "praim/common.hpp"

namespace praim {
namespace {

// Splits one CSV line; double quotes group fields and escape by doubling.
std::vector<std::string> split_csv_line(std::string_view line,
                                        std::size_t line_no) {
  std::vector<std::string> out;
  std::string field;
  bool in_quote = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quote) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quote = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      if (!field.empty()) {
        throw ParseError("unexpected quote inside unquoted field", line_no);
      }
      in_quote = true;
    } else if (c == ',') {
      out.push_back(field);
      field.clear();
    } else {
      field += c;
    }
  }
  if (in_quote) throw ParseError("unterminated quoted field", line_no);
  out.push_back(field);
  return out;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// Iterates non-empty lines of text, handling trailing CR and missing final
// newline; calls fn(line, line_no).
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    if (!trim(line).empty()) fn(line, line_no);
    if (nl == text.size()) break;
    pos = nl + 1;
  }
}

std::map<std::string, std::size_t> map_header(
    const std::vector<std::string>& header,
    const std::vector<std::string>& required) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name(trim(header[i]));
    if (std::find(required.begin(), required.end(), name) == required.end()) {
      throw SchemaError("unexpected column '" + name + "' in header");
    }
    if (!index.emplace(name, i).second) {
      throw SchemaError("duplicate column '" + name + "' in header");
    }
  }
  for (const auto& name : required) {
    if (!index.count(name)) {
      throw SchemaError("missing column '" + name + "' in header");
    }
  }
  return index;
}

double parse_nonneg(std::string_view token, const char* what,
                    std::size_t line_no) {
  const double v = parse_double(token, line_no);
  if (!(v >= 0.0)) {
    throw ValidationError("line " + std::to_string(line_no) + ": " + what +
                          " must be non-negative, got '" + std::string(token) +
                          "'");
  }
  return v;
}

std::string session_row(const ChargingSession& s) {
  return csv_escape(s.station_id) + "," + to_iso_utc(s.start_time) + "," +
         format_double(s.duration_min) + "," + format_double(s.energy_kwh) +
         "," + format_double(s.lat) + "," + format_double(s.lon);
}

// "http://host:port/some/path" -> {"http://host:port", "/some/path"}.
std::pair<std::string, std::string> split_url(const std::string& url) {
  const std::size_t scheme = url.find("://");
  const std::size_t path_start =
      url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::vector<Poi> fetch_pois_remote(const std::string& endpoint,
                                   const StationLocation& loc,
                                   double radius_km) {
  const auto [base, path] = split_url(endpoint);
  httplib::Client client(base);
  client.set_connection_timeout(5, 0);
  client.set_read_timeout(10, 0);
  const std::string query = path + "?lat=" + format_double(loc.lat) +
                            "&lon=" + format_double(loc.lon) +
                            "&radius_km=" + format_double(radius_km);
  std::string body;
  bool ok = false;
  for (int attempt = 0; attempt < 2 && !ok; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    auto res = client.Get(query);
    if (res && res->status == 200) {
      body = res->body;
      ok = true;
    }
  }
  if (!ok) throw IoError("PoI endpoint unreachable: " + endpoint);

  nlohmann::json doc = nlohmann::json::parse(body, nullptr, false);
  if (doc.is_discarded()) {
    throw IoError("PoI endpoint returned invalid JSON");
  }
  const nlohmann::json& arr = doc.is_array() ? doc : doc.at("pois");
  std::vector<Poi> out;
  for (const auto& item : arr) {
    Poi p;
    p.name = item.at("name").get<std::string>();
    p.category = item.at("category").get<std::string>();
    p.distance_km = item.at("distance_km").get<double>();
    if (p.distance_km <= radius_km) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

SessionParseResult parse_sessions(std::string_view csv_text) {
  static const std::vector<std::string> kColumns = {
      "station_id", "start_time", "duration_min", "energy_kwh", "lat", "lon"};

  SessionParseResult result;
  std::map<std::string, std::size_t> index;
  std::set<std::string> seen_rows;
  bool have_header = false;

  for_each_line(csv_text, [&](std::string_view line, std::size_t line_no) {
    const auto fields = split_csv_line(line, line_no);
    if (!have_header) {
      index = map_header(fields, kColumns);
      have_header = true;
      return;
    }
    if (fields.size() != index.size()) {
      throw ParseError("expected " + std::to_string(index.size()) +
                           " fields, got " + std::to_string(fields.size()),
                       line_no);
    }
    ChargingSession s;
    s.station_id = trim(fields[index.at("station_id")]);
    if (s.station_id.empty()) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": empty station_id");
    }
    s.start_time = parse_timestamp(fields[index.at("start_time")], line_no);
    s.duration_min =
        parse_nonneg(fields[index.at("duration_min")], "duration_min", line_no);
    s.energy_kwh =
        parse_nonneg(fields[index.at("energy_kwh")], "energy_kwh", line_no);
    s.lat = parse_double(fields[index.at("lat")], line_no);
    s.lon = parse_double(fields[index.at("lon")], line_no);
    if (s.lat < -90.0 || s.lat > 90.0) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": latitude out of [-90, 90]");
    }
    if (s.lon < -180.0 || s.lon > 180.0) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": longitude out of [-180, 180]");
    }
    if (!seen_rows.insert(session_row(s)).second) {
      ++result.duplicates_dropped;
      return;
    }
    result.sessions.push_back(std::move(s));
  });

  if (!have_header) throw SchemaError("session CSV is empty (no header)");
  return result;
}

std::string sessions_to_csv(const std::vector<ChargingSession>& sessions) {
  std::string out = "station_id,start_time,duration_min,energy_kwh,lat,lon\n";
  for (const auto& s : sessions) {
    out += session_row(s);
    out += '\n';
  }
  return out;
}

double DailyDemandSeries::missing_rate() const {
  if (missing.empty()) return 0.0;
  std::size_t gaps = 0;
  for (auto m : missing) gaps += m;
  return static_cast<double>(gaps) / static_cast<double>(missing.size());
}

CalendarFeatures calendar_of(const Date& d) {
  return CalendarFeatures{day_of_week(d), d.day, d.month};
}

DailyDemandSeries aggregate_daily(const std::vector<ChargingSession>& sessions,
                                  const std::string& station_id,
                                  const Date& start, const Date& end) {
  if (days_between(start, end) < 0) {
    throw ValidationError("empty date range: " + to_string(start) + " .. " +
                          to_string(end));
  }
  const std::size_t n = static_cast<std::size_t>(days_between(start, end)) + 1;
  DailyDemandSeries series;
  series.station_id = station_id;
  series.start_date = start;
  series.end_date = end;
  series.demand.assign(n, 0.0);
  series.missing.assign(n, 1);
  for (const auto& s : sessions) {
    if (s.station_id != station_id) {
      throw ValidationError("session for station '" + s.station_id +
                            "' passed to aggregate_daily for '" + station_id +
                            "'");
    }
    const std::int64_t idx = days_between(start, s.start_time.utc_date());
    if (idx < 0 || idx >= static_cast<std::int64_t>(n)) continue;
    series.demand[static_cast<std::size_t>(idx)] += s.energy_kwh;
    series.missing[static_cast<std::size_t>(idx)] = 0;
  }
  return series;
}

std::vector<StationFilterEntry> filter_entries(
    const std::vector<DailyDemandSeries>& series_set, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw ValidationError("filter threshold must be in (0, 1)");
  }
  std::vector<StationFilterEntry> out;
  out.reserve(series_set.size());
  for (const auto& s : series_set) {
    const double rate = s.missing_rate();
    out.push_back({s.station_id, rate, rate <= tau});
  }
  return out;
}

std::vector<std::string> filter_stations(
    const std::vector<DailyDemandSeries>& series_set, double tau) {
  std::vector<std::string> retained;
  for (const auto& e : filter_entries(series_set, tau)) {
    if (e.retained) retained.push_back(e.station_id);
  }
  return retained;
}

std::map<std::string, std::vector<Poi>> parse_pois_csv(std::string_view text,
                                                       double radius_km) {
  static const std::vector<std::string> kColumns = {"station_id", "name",
                                                    "category", "distance_km"};
  std::map<std::string, std::vector<Poi>> out;
  std::map<std::string, std::size_t> index;
  bool have_header = false;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    const auto fields = split_csv_line(line, line_no);
    if (!have_header) {
      index = map_header(fields, kColumns);
      have_header = true;
      return;
    }
    if (fields.size() != index.size()) {
      throw ParseError("expected " + std::to_string(index.size()) +
                           " fields, got " + std::to_string(fields.size()),
                       line_no);
    }
    Poi p;
    p.name = fields[index.at("name")];
    p.category = fields[index.at("category")];
    p.distance_km =
        parse_nonneg(fields[index.at("distance_km")], "distance_km", line_no);
    const std::string sid(trim(fields[index.at("station_id")]));
    if (p.distance_km <= radius_km) out[sid].push_back(std::move(p));
  });
  return out;
}

std::string pois_to_csv(const std::map<std::string, std::vector<Poi>>& pois) {
  std::string out = "station_id,name,category,distance_km\n";
  for (const auto& [sid, list] : pois) {
    for (const auto& p : list) {
      out += csv_escape(sid) + "," + csv_escape(p.name) + "," +
             csv_escape(p.category) + "," + format_double(p.distance_km) +
             "\n";
    }
  }
  return out;
}

std::map<std::string, StationContext> load_pois(
    const PoiConfig& cfg,
    const std::map<std::string, StationLocation>& locations) {
  std::map<std::string, StationContext> out;
  for (const auto& [sid, loc] : locations) {
    out[sid] = StationContext{sid, loc, {}};
  }

  if (!cfg.endpoint.empty()) {
    try {
      std::map<std::string, std::vector<Poi>> fetched;
      for (const auto& [sid, loc] : locations) {
        fetched[sid] = fetch_pois_remote(cfg.endpoint, loc, cfg.radius_km);
      }
      for (auto& [sid, list] : fetched) out[sid].pois = list;
      if (!cfg.csv.empty()) write_text_file(cfg.csv, pois_to_csv(fetched));
      return out;
    } catch (const IoError&) {
      if (cfg.csv.empty() || !std::filesystem::exists(cfg.csv)) throw;
      // Fall through to the local cache.
    }
  }

  if (cfg.csv.empty() || !std::filesystem::exists(cfg.csv)) {
    return out;  // no source: empty PoI sets, not an error
  }
  auto parsed = parse_pois_csv(read_text_file(cfg.csv), cfg.radius_km);
  for (auto& [sid, list] : parsed) {
    auto it = out.find(sid);
    if (it != out.end()) it->second.pois = std::move(list);
  }
  return out;
}

double usable_sample_probability(double delta, int lookback_days,
                                 int horizon_days, int neighbor_count) {
  if (!(delta >= 0.0 && delta <= 1.0)) {
    throw ValidationError("missing fraction must be in [0, 1]");
  }
  if (lookback_days < 1 || horizon_days < 1 || neighbor_count < 0) {
    throw ValidationError(
        "lookback and horizon must be >= 1, neighbor count >= 0");
  }
  const double exponent =
      static_cast<double>((neighbor_count + 1) * (lookback_days + horizon_days));
  return std::pow(1.0 - delta, exponent);
}

void write_series_csv(const DailyDemandSeries& series,
                      const std::string& path) {
  std::string out = "station_id,date,demand_kwh,missing\n";
  for (std::size_t t = 0; t < series.size(); ++t) {
    out += csv_escape(series.station_id) + "," + to_string(series.date_at(t)) +
           "," + format_double(series.demand[t]) + "," +
           (series.missing[t] ? "1" : "0") + "\n";
  }
  write_text_file(path, out);
}

DailyDemandSeries read_series_csv(const std::string& path) {
  static const std::vector<std::string> kColumns = {"station_id", "date",
                                                    "demand_kwh", "missing"};
  const std::string text = read_text_file(path);
  DailyDemandSeries series;
  std::map<std::string, std::size_t> index;
  bool have_header = false;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    const auto fields = split_csv_line(line, line_no);
    if (!have_header) {
      index = map_header(fields, kColumns);
      have_header = true;
      return;
    }
    const std::string sid(trim(fields[index.at("station_id")]));
    const Date date = parse_date(fields[index.at("date")], line_no);
    const double demand =
        parse_nonneg(fields[index.at("demand_kwh")], "demand_kwh", line_no);
    const auto miss = parse_int(fields[index.at("missing")], line_no);
    if (miss != 0 && miss != 1) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": missing flag must be 0 or 1");
    }
    if (miss == 1 && demand != 0.0) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": missing day must have zero demand");
    }
    if (series.demand.empty()) {
      series.station_id = sid;
      series.start_date = date;
    } else {
      if (sid != series.station_id) {
        throw ValidationError("line " + std::to_string(line_no) +
                              ": mixed station ids in one series file");
      }
      if (days_between(series.end_date, date) != 1) {
        throw ValidationError("line " + std::to_string(line_no) +
                              ": dates must be contiguous ascending");
      }
    }
    series.end_date = date;
    series.demand.push_back(demand);
    series.missing.push_back(static_cast<std::uint8_t>(miss));
  });
  if (series.demand.empty()) {
    throw ValidationError("series file has no data rows: " + path);
  }
  return series;
}

std::vector<DailyDemandSeries> load_series_dir(const std::string& dir) {
  std::vector<std::string> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") {
      continue;
    }
    // Ingest drops its station/PoI metadata next to the series files.
    const std::string name = entry.path().filename().string();
    if (name == "stations.csv" || name == "pois.csv") continue;
    paths.push_back(entry.path().string());
  }
  std::sort(paths.begin(), paths.end());
  std::vector<DailyDemandSeries> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(read_series_csv(p));
  std::sort(out.begin(), out.end(),
            [](const DailyDemandSeries& a, const DailyDemandSeries& b) {
              return a.station_id < b.station_id;
            });
  return out;
}

}  // namespace praim
