#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <string_view>

namespace tutorforge {

using Timestamp = std::chrono::sys_seconds;
using Clock = std::function<Timestamp()>;

Timestamp system_now();

/// "2024-01-15T10:00:00Z". Always UTC.
std::string format_timestamp(Timestamp t);

/// Inverse of format_timestamp; throws Error(ConfigError) on malformed text.
Timestamp parse_timestamp(std::string_view text);

/// Calendar date "YYYY-MM-DD" of `t` shifted by a fixed UTC offset.
std::string local_date(Timestamp t, int utc_offset_minutes);

/// Days since 1970-01-01 for a "YYYY-MM-DD" string.
long days_from_date(std::string_view date);
std::string date_from_days(long days);

}  // namespace tutorforge
