#include "tutorforge/analytics/quality.hpp"

#include <map>

#include <fmt/format.h>

#include "tutorforge/core/error.hpp"

namespace tutorforge::analytics {

using nlohmann::json;
using records::Correctness;
using records::Directness;
using records::Helpfulness;

std::size_t RateReport::percent() const noexcept {
  return (200 * numerator + denominator) / (2 * denominator);
}

std::string RateReport::render() const { return std::to_string(percent()) + "%"; }

RateReport make_rate(std::size_t numerator, std::size_t denominator) {
  if (denominator == 0) throw Error(ErrorCode::DenominatorZero, "rate over an empty set");
  return {numerator, denominator};
}

QualityReport quality_rates(const std::vector<records::UsageRecord>& records,
                            const std::optional<std::string>& version) {
  QualityReport report;
  std::size_t correct = 0;
  std::size_t helpful = 0;
  std::map<Directness, std::size_t> directness;
  std::map<records::QueryCategory, std::size_t> categories;
  for (const auto& r : records) {
    if (r.labels.empty()) continue;
    if (version && r.query.version != *version) continue;
    const auto& l = r.labels.front();
    ++report.labeled;
    if (l.correctness == Correctness::Correct) {
      ++correct;
      if (l.helpfulness == Helpfulness::Helpful) ++helpful;
    }
    ++directness[l.directness];
    ++categories[l.query_category];
  }
  report.correctness = make_rate(correct, report.labeled);
  report.helpfulness_given_correct = make_rate(helpful, correct);
  const auto share = [&](std::string code, std::size_t n) {
    return Share{std::move(code), n, static_cast<double>(n) / static_cast<double>(report.labeled)};
  };
  for (auto d : records::kAllDirectness) {
    report.directness.push_back(share(std::string(to_string(d)), directness[d]));
  }
  for (auto c : records::kAllCategories) {
    report.categories.push_back(share(std::string(to_string(c)), categories[c]));
  }
  return report;
}

PseudocodeBreakdown pseudocode_breakdown(const QualityReport& report) {
  const auto count_of = [&](Directness d) {
    for (const auto& s : report.directness) {
      if (s.code == to_string(d)) return s.count;
    }
    return std::size_t{0};
  };
  const auto n = static_cast<double>(report.labeled);
  PseudocodeBreakdown b;
  const auto high = count_of(Directness::ExampleHighLevelPseudocode);
  const auto spec = count_of(Directness::ExactSolutionPseudocode);
  b.high_level = {"example-high-level-pseudocode", high, static_cast<double>(high) / n};
  b.specific = {"exact-solution-pseudocode", spec, static_cast<double>(spec) / n};
  b.total = {"pseudocode", high + spec, static_cast<double>(high + spec) / n};
  const auto pct = [&](std::size_t k) { return static_cast<long>(make_rate(k, report.labeled).percent()); };
  b.residual_points = pct(high + spec) - pct(high) - pct(spec);
  return b;
}

std::string render_quality(const QualityReport& report) {
  std::string out = fmt::format("Labeled responses: {}\n", report.labeled);
  out += fmt::format("Correctness: {} ({}/{})\n", report.correctness.render(),
                     report.correctness.numerator, report.correctness.denominator);
  out += fmt::format("Helpfulness given correct: {} ({}/{})\n",
                     report.helpfulness_given_correct.render(),
                     report.helpfulness_given_correct.numerator,
                     report.helpfulness_given_correct.denominator);
  out += "Directness:\n";
  for (const auto& s : report.directness) {
    out += fmt::format("  {}: {} ({})\n", s.code, s.count,
                       make_rate(s.count, report.labeled).render());
  }
  const auto b = pseudocode_breakdown(report);
  out += fmt::format("Pseudo-code: {} ({}) = high-level example {} ({}) + specific {} ({})",
                     b.total.count, make_rate(b.total.count, report.labeled).render(),
                     b.high_level.count, make_rate(b.high_level.count, report.labeled).render(),
                     b.specific.count, make_rate(b.specific.count, report.labeled).render());
  if (b.residual_points != 0) out += fmt::format("; rounded parts differ by {} points", b.residual_points);
  out += "\nQuery categories:\n";
  for (const auto& s : report.categories) {
    out += fmt::format("  {}: {} ({})\n", s.code, s.count,
                       make_rate(s.count, report.labeled).render());
  }
  return out;
}

json to_json(const QualityReport& report) {
  const auto rate = [](const RateReport& r) {
    return json{{"numerator", r.numerator}, {"denominator", r.denominator}, {"rate", r.rate()},
                {"percent", r.percent()}};
  };
  const auto shares = [](const std::vector<Share>& v) {
    json out = json::array();
    for (const auto& s : v) {
      out.push_back({{"code", s.code}, {"count", s.count}, {"proportion", s.proportion}});
    }
    return out;
  };
  const auto b = pseudocode_breakdown(report);
  return {{"labeled", report.labeled},
          {"correctness", rate(report.correctness)},
          {"helpfulness_given_correct", rate(report.helpfulness_given_correct)},
          {"directness", shares(report.directness)},
          {"categories", shares(report.categories)},
          {"pseudocode", {{"total", b.total.count},
                          {"high_level", b.high_level.count},
                          {"specific", b.specific.count},
                          {"residual_points", b.residual_points}}}};
}

Agreement inter_rater(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.size() != b.size() || a.empty()) {
    throw Error(ErrorCode::LengthMismatch,
                fmt::format("label sequences of length {} and {}", a.size(), b.size()));
  }
  const auto n = static_cast<double>(a.size());
  std::map<std::string, std::pair<std::size_t, std::size_t>> marginals;
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    same += a[i] == b[i];
    ++marginals[a[i]].first;
    ++marginals[b[i]].second;
  }
  Agreement out;
  out.percent_agreement = static_cast<double>(same) / n;
  double pe = 0;
  for (const auto& [label, m] : marginals) {
    pe += (static_cast<double>(m.first) / n) * (static_cast<double>(m.second) / n);
  }
  if (pe < 1.0) out.kappa = (out.percent_agreement - pe) / (1.0 - pe);
  return out;
}

}  // namespace tutorforge::analytics
