#include "praim/dates.hpp"

#include <cstdio>

#include "praim/common.hpp"

namespace praim {
namespace {

constexpr int kDaysInMonth[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};

bool is_leap(int y) { return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0); }

int last_day_of_month(int y, int m) {
  if (m == 2 && is_leap(y)) return 29;
  return kDaysInMonth[m - 1];
}

}  // namespace

bool is_valid_date(const Date& d) {
  if (d.month < 1 || d.month > 12) return false;
  if (d.day < 1 || d.day > last_day_of_month(d.year, d.month)) return false;
  return true;
}

// Howard Hinnant's civil-days algorithm.
std::int64_t days_from_civil(const Date& d) {
  std::int64_t y = d.year;
  const int m = d.month;
  const int dd = d.day;
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + dd - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

Date civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned dd = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m),
              static_cast<int>(dd)};
}

Date add_days(const Date& d, std::int64_t n) {
  return civil_from_days(days_from_civil(d) + n);
}

std::int64_t days_between(const Date& a, const Date& b) {
  return days_from_civil(b) - days_from_civil(a);
}

int day_of_week(const Date& d) {
  // 1970-01-01 was a Thursday; shift so 0 = Monday.
  const std::int64_t z = days_from_civil(d);
  return static_cast<int>(((z % 7) + 7 + 3) % 7);
}

const char* weekday_name(int dow) {
  static const char* kNames[] = {"Monday", "Tuesday",  "Wednesday", "Thursday",
                                 "Friday", "Saturday", "Sunday"};
  return kNames[dow];
}

const char* month_name(int month) {
  static const char* kNames[] = {"January", "February", "March",
                                 "April",   "May",      "June",
                                 "July",    "August",   "September",
                                 "October", "November", "December"};
  return kNames[month - 1];
}

std::string to_string(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
  return std::string(buf);
}

Date parse_date(std::string_view text, std::size_t line) {
  text = trim(text);
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw ParseError("bad date '" + std::string(text) + "'", line);
  }
  Date d;
  d.year = static_cast<int>(parse_int(text.substr(0, 4), line));
  d.month = static_cast<int>(parse_int(text.substr(5, 2), line));
  d.day = static_cast<int>(parse_int(text.substr(8, 2), line));
  if (!is_valid_date(d)) {
    throw ParseError("invalid calendar date '" + std::string(text) + "'", line);
  }
  return d;
}

Date UtcTime::utc_date() const {
  std::int64_t days = seconds / 86400;
  if (seconds < 0 && seconds % 86400 != 0) --days;
  return civil_from_days(days);
}

std::string to_iso_utc(const UtcTime& t) {
  std::int64_t days = t.seconds / 86400;
  std::int64_t rem = t.seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  const Date d = civil_from_days(days);
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", d.year,
                d.month, d.day, static_cast<int>(rem / 3600),
                static_cast<int>((rem / 60) % 60), static_cast<int>(rem % 60));
  return std::string(buf);
}

UtcTime parse_timestamp(std::string_view text, std::size_t line) {
  text = trim(text);
  // Minimal form: YYYY-MM-DDThh:mm:ssZ (20 chars).
  if (text.size() < 20 || text[10] != 'T' || text[13] != ':' ||
      text[16] != ':') {
    throw ParseError("bad timestamp '" + std::string(text) + "'", line);
  }
  const Date d = parse_date(text.substr(0, 10), line);
  const int hh = static_cast<int>(parse_int(text.substr(11, 2), line));
  const int mm = static_cast<int>(parse_int(text.substr(14, 2), line));
  const int ss = static_cast<int>(parse_int(text.substr(17, 2), line));
  if (hh > 23 || mm > 59 || ss > 60 || hh < 0 || mm < 0 || ss < 0) {
    throw ParseError("bad time of day in '" + std::string(text) + "'", line);
  }
  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
  }
  if (pos >= text.size()) {
    throw ParseError("timestamp lacks a UTC zone designator: '" +
                         std::string(text) + "'",
                     line);
  }
  std::int64_t offset = 0;
  if (text[pos] == 'Z' && pos + 1 == text.size()) {
    offset = 0;
  } else if ((text[pos] == '+' || text[pos] == '-') &&
             pos + 6 == text.size() && text[pos + 3] == ':') {
    const int oh = static_cast<int>(parse_int(text.substr(pos + 1, 2), line));
    const int om = static_cast<int>(parse_int(text.substr(pos + 4, 2), line));
    offset = (oh * 3600 + om * 60) * (text[pos] == '+' ? 1 : -1);
  } else {
    throw ParseError("timestamp lacks a UTC zone designator: '" +
                         std::string(text) + "'",
                     line);
  }
  const std::int64_t local = days_from_civil(d) * 86400 + hh * 3600 + mm * 60 + ss;
  return UtcTime{local - offset};
}

}  // namespace praim
