#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace praim {

/// Proleptic Gregorian calendar date.
struct Date {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31

  auto operator<=>(const Date&) const = default;
};

bool is_valid_date(const Date& d);

/// Days since 1970-01-01 (negative before the epoch).
std::int64_t days_from_civil(const Date& d);
Date civil_from_days(std::int64_t days);

Date add_days(const Date& d, std::int64_t n);
/// Inclusive day count delta: b - a.
std::int64_t days_between(const Date& a, const Date& b);

/// ISO day of week, 0 = Monday .. 6 = Sunday.
int day_of_week(const Date& d);

const char* weekday_name(int dow);
const char* month_name(int month);

std::string to_string(const Date& d);  // "YYYY-MM-DD"
Date parse_date(std::string_view text, std::size_t line = 0);

/// A UTC instant, seconds since the Unix epoch.
struct UtcTime {
  std::int64_t seconds = 0;
  Date utc_date() const;

  auto operator<=>(const UtcTime&) const = default;
};

std::string to_iso_utc(const UtcTime& t);  // "YYYY-MM-DDThh:mm:ssZ"

/// Parses ISO-8601 "YYYY-MM-DDThh:mm:ss" with a mandatory zone designator
/// ('Z' or +hh:mm / -hh:mm). Fractional seconds are accepted and truncated.
/// Zone-less timestamps are rejected.
UtcTime parse_timestamp(std::string_view text, std::size_t line = 0);

}  // namespace praim
