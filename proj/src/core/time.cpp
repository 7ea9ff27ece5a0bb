#include "tutorforge/core/time.hpp"

#include <cstdio>

#include "tutorforge/core/error.hpp"

namespace tutorforge {

namespace chr = std::chrono;

Timestamp system_now() {
  return chr::time_point_cast<chr::seconds>(chr::system_clock::now());
}

std::string format_timestamp(Timestamp t) {
  const auto days = chr::floor<chr::days>(t);
  const chr::year_month_day ymd{days};
  const chr::hh_mm_ss hms{t - days};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02lldZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()),
                static_cast<long>(hms.minutes().count()),
                static_cast<long long>(hms.seconds().count()));
  return buf;
}

Timestamp parse_timestamp(std::string_view text) {
  int y = 0;
  unsigned mo = 0, d = 0, h = 0, mi = 0, s = 0;
  char z = 0;
  const std::string owned(text);
  if (std::sscanf(owned.c_str(), "%d-%u-%uT%u:%u:%u%c", &y, &mo, &d, &h, &mi, &s, &z) != 7 ||
      z != 'Z') {
    throw Error(ErrorCode::ConfigError, "malformed timestamp: " + owned);
  }
  const chr::year_month_day ymd{chr::year{y}, chr::month{mo}, chr::day{d}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) {
    throw Error(ErrorCode::ConfigError, "malformed timestamp: " + owned);
  }
  return chr::sys_days{ymd} + chr::hours{h} + chr::minutes{mi} + chr::seconds{s};
}

std::string local_date(Timestamp t, int utc_offset_minutes) {
  const auto shifted = t + chr::minutes{utc_offset_minutes};
  return date_from_days(chr::floor<chr::days>(shifted).time_since_epoch().count());
}

long days_from_date(std::string_view date) {
  int y = 0;
  unsigned mo = 0, d = 0;
  const std::string owned(date);
  if (std::sscanf(owned.c_str(), "%d-%u-%u", &y, &mo, &d) != 3) {
    throw Error(ErrorCode::ConfigError, "malformed date: " + owned);
  }
  const chr::year_month_day ymd{chr::year{y}, chr::month{mo}, chr::day{d}};
  if (!ymd.ok()) throw Error(ErrorCode::ConfigError, "malformed date: " + owned);
  return chr::sys_days{ymd}.time_since_epoch().count();
}

std::string date_from_days(long days) {
  const chr::year_month_day ymd{chr::sys_days{chr::days{days}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace tutorforge
