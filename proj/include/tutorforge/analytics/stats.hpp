#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tutorforge/records/usage.hpp"

namespace tutorforge::analytics {

struct FeatureStats {
  FeatureKind feature = FeatureKind::GeneralQuestion;
  std::string version;
  std::size_t count = 0;
  std::size_t rated = 0;
  std::optional<double> mean;
  std::optional<double> sd;  // sample deviation, absent below two ratings
  bool operator==(const FeatureStats&) const = default;
};

struct FollowUpStats {
  std::size_t questions = 0;
  std::size_t threads = 0;  // distinct top-level responses that received follow-ups
  bool operator==(const FollowUpStats&) const = default;
};

struct DayPoint {
  std::string date;
  std::size_t queries = 0;
  std::size_t unique_users = 0;
  double smoothed_queries = 0;
  double smoothed_users = 0;
  bool operator==(const DayPoint&) const = default;
};

struct UserActivity {
  std::string user;
  std::size_t queries = 0;
  bool operator==(const UserActivity&) const = default;
};

struct UsageStats {
  std::vector<FeatureStats> features;  // sorted by feature, then version
  FollowUpStats followups;
  std::vector<DayPoint> daily;
  std::vector<UserActivity> users;  // sorted by user
  bool operator==(const UsageStats&) const = default;
};

struct StatsOptions {
  std::size_t smoothing_window = 7;
  int utc_offset_minutes = 0;
};

struct RatingMoments {
  std::size_t n = 0;
  std::optional<double> mean;
  std::optional<double> sd;
};

RatingMoments rating_moments(const std::vector<int>& stars);

UsageStats feature_usage_stats(const std::vector<records::UsageRecord>& records,
                               const StatsOptions& options = {});

/// Centered moving average; near the ends of the range the window shrinks to
/// the days that exist. Throws Error(InvalidRequest) for a zero window.
std::vector<double> smooth(const std::vector<double>& values, std::size_t window);

/// Per-day counts from min to max date with empty days filled in.
std::vector<DayPoint> daily_series(const std::vector<records::UsageRecord>& records,
                                   std::size_t window, int utc_offset_minutes = 0);

/// "M=3.99, SD=1.34"; "M=4.00" alone when the deviation is undefined and "-"
/// without ratings.
std::string format_rating(const std::optional<double>& mean, const std::optional<double>& sd);

/// Feature table with one row per main feature:
/// "General Question | 1648 | M=3.99, SD=1.34 | 1034 | M=4.10, SD=1.32".
std::string render_usage_table(const UsageStats& stats, const std::vector<std::string>& versions);

nlohmann::json to_json(const UsageStats& stats);

}  // namespace tutorforge::analytics
