#include "tutorforge/analytics/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

#include "tutorforge/core/error.hpp"

namespace tutorforge::analytics {

using nlohmann::json;

RatingMoments rating_moments(const std::vector<int>& stars) {
  RatingMoments m;
  m.n = stars.size();
  if (stars.empty()) return m;
  // Summing in sorted order keeps the result independent of record order.
  auto sorted = stars;
  std::sort(sorted.begin(), sorted.end());
  double sum = 0;
  for (int s : sorted) sum += s;
  const double mean = sum / static_cast<double>(sorted.size());
  m.mean = mean;
  if (sorted.size() >= 2) {
    double sq = 0;
    for (int s : sorted) sq += (s - mean) * (s - mean);
    m.sd = std::sqrt(sq / static_cast<double>(stars.size() - 1));
  }
  return m;
}

std::vector<double> smooth(const std::vector<double>& values, std::size_t window) {
  if (window == 0) throw Error(ErrorCode::InvalidRequest, "smoothing window must be at least 1");
  const std::size_t before = (window - 1) / 2;
  const std::size_t after = window - 1 - before;
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t lo = i >= before ? i - before : 0;
    const std::size_t hi = std::min(values.size() - 1, i + after);
    double sum = 0;
    for (std::size_t k = lo; k <= hi; ++k) sum += values[k];
    out[i] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

std::vector<DayPoint> daily_series(const std::vector<records::UsageRecord>& records,
                                   std::size_t window, int utc_offset_minutes) {
  if (window == 0) throw Error(ErrorCode::InvalidRequest, "smoothing window must be at least 1");
  std::map<long, std::pair<std::size_t, std::set<std::string>>> days;
  for (const auto& r : records) {
    auto& day = days[days_from_date(local_date(r.query.created_at, utc_offset_minutes))];
    ++day.first;
    day.second.insert(r.query.user);
  }
  std::vector<DayPoint> out;
  if (days.empty()) return out;
  for (long d = days.begin()->first; d <= days.rbegin()->first; ++d) {
    DayPoint p;
    p.date = date_from_days(d);
    if (const auto it = days.find(d); it != days.end()) {
      p.queries = it->second.first;
      p.unique_users = it->second.second.size();
    }
    out.push_back(std::move(p));
  }
  std::vector<double> q;
  std::vector<double> u;
  for (const auto& p : out) {
    q.push_back(static_cast<double>(p.queries));
    u.push_back(static_cast<double>(p.unique_users));
  }
  const auto sq = smooth(q, window);
  const auto su = smooth(u, window);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].smoothed_queries = sq[i];
    out[i].smoothed_users = su[i];
  }
  return out;
}

UsageStats feature_usage_stats(const std::vector<records::UsageRecord>& records,
                               const StatsOptions& options) {
  UsageStats stats;
  std::map<std::pair<FeatureKind, std::string>, std::pair<std::size_t, std::vector<int>>> groups;
  std::map<std::string, const records::UsageRecord*> by_response;
  std::map<std::string, std::size_t> users;
  for (const auto& r : records) {
    auto& g = groups[{r.query.feature, r.query.version}];
    ++g.first;
    if (r.rating) g.second.push_back(r.rating->stars);
    by_response[r.response.id] = &r;
    ++users[r.query.user];
  }
  for (const auto& [key, g] : groups) {
    const auto m = rating_moments(g.second);
    stats.features.push_back({key.first, key.second, g.first, m.n, m.mean, m.sd});
  }
  std::set<std::string> roots;
  for (const auto& r : records) {
    if (!r.query.parent_response) continue;
    ++stats.followups.questions;
    // Walk to the top-level response; a missing parent ends the walk.
    std::string root = *r.query.parent_response;
    std::set<std::string> seen{root};
    for (auto it = by_response.find(root);
         it != by_response.end() && it->second->query.parent_response;
         it = by_response.find(root)) {
      root = *it->second->query.parent_response;
      if (!seen.insert(root).second) break;
    }
    roots.insert(root);
  }
  stats.followups.threads = roots.size();
  stats.daily = daily_series(records, options.smoothing_window, options.utc_offset_minutes);
  for (const auto& [user, n] : users) stats.users.push_back({user, n});
  return stats;
}

std::string format_rating(const std::optional<double>& mean, const std::optional<double>& sd) {
  if (!mean) return "-";
  if (!sd) return fmt::format("M={:.2f}", *mean);
  return fmt::format("M={:.2f}, SD={:.2f}", *mean, *sd);
}

std::string render_usage_table(const UsageStats& stats, const std::vector<std::string>& versions) {
  static constexpr FeatureKind kRows[] = {FeatureKind::GeneralQuestion,
                                          FeatureKind::QuestionFromCode, FeatureKind::HelpFixCode,
                                          FeatureKind::ExplainCode, FeatureKind::HelpWriteCode};
  const auto upper = [](std::string s) {
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
  };
  std::string out = "Feature Type";
  for (const auto& v : versions) out += " | Count " + upper(v) + " | Rating " + upper(v);
  out += "\n";
  for (auto feature : kRows) {
    out += std::string(display_name(feature));
    for (const auto& v : versions) {
      const FeatureStats* found = nullptr;
      for (const auto& f : stats.features) {
        if (f.feature == feature && f.version == v) found = &f;
      }
      if (found) {
        out += fmt::format(" | {} | {}", found->count, format_rating(found->mean, found->sd));
      } else {
        out += " | 0 | -";
      }
    }
    out += "\n";
  }
  out += fmt::format("Follow-up questions: {} in {} threads\n", stats.followups.questions,
                     stats.followups.threads);
  return out;
}

json to_json(const UsageStats& stats) {
  json features = json::array();
  for (const auto& f : stats.features) {
    features.push_back({{"feature", std::string(to_string(f.feature))},
                        {"version", f.version},
                        {"count", f.count},
                        {"rated", f.rated},
                        {"mean", f.mean ? json(*f.mean) : json(nullptr)},
                        {"sd", f.sd ? json(*f.sd) : json(nullptr)}});
  }
  json daily = json::array();
  for (const auto& d : stats.daily) {
    daily.push_back({{"date", d.date},
                     {"queries", d.queries},
                     {"unique_users", d.unique_users},
                     {"smoothed_queries", d.smoothed_queries},
                     {"smoothed_users", d.smoothed_users}});
  }
  json users = json::array();
  for (const auto& u : stats.users) users.push_back({{"user", u.user}, {"queries", u.queries}});
  return {{"features", features},
          {"followups", {{"questions", stats.followups.questions}, {"threads", stats.followups.threads}}},
          {"daily", daily},
          {"users", users}};
}

}  // namespace tutorforge::analytics
