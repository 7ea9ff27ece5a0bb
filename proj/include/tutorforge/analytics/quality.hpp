#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tutorforge/records/usage.hpp"

namespace tutorforge::analytics {

struct RateReport {
  std::size_t numerator = 0;
  std::size_t denominator = 1;

  [[nodiscard]] double rate() const noexcept {
    return static_cast<double>(numerator) / static_cast<double>(denominator);
  }
  /// Integer percent, halves rounded up.
  [[nodiscard]] std::size_t percent() const noexcept;
  /// "79%".
  [[nodiscard]] std::string render() const;
  bool operator==(const RateReport&) const = default;
};

/// Throws Error(DenominatorZero).
RateReport make_rate(std::size_t numerator, std::size_t denominator);

struct Share {
  std::string code;
  std::size_t count = 0;
  double proportion = 0;
};

struct QualityReport {
  std::size_t labeled = 0;
  RateReport correctness;
  RateReport helpfulness_given_correct;
  std::vector<Share> directness;  // directness codebook order
  std::vector<Share> categories;  // query codebook order
};

/// Uses the first coder's labels of each labeled record; `version` filters
/// when set. Errors: DenominatorZero (no labeled or no correct records).
QualityReport quality_rates(const std::vector<records::UsageRecord>& records,
                            const std::optional<std::string>& version = {});

/// Pseudo-code share and its two sub-rates. The residual is the rounded total
/// minus the rounded parts and is reported, never folded into either part.
struct PseudocodeBreakdown {
  Share total;
  Share high_level;
  Share specific;
  long residual_points = 0;
};
PseudocodeBreakdown pseudocode_breakdown(const QualityReport& report);

std::string render_quality(const QualityReport& report);
nlohmann::json to_json(const QualityReport& report);

struct Agreement {
  double percent_agreement = 0;
  std::optional<double> kappa;  // absent when chance agreement is 1
};

/// Cohen's kappa over parallel label sequences. Throws Error(LengthMismatch)
/// for unequal or empty sequences.
Agreement inter_rater(const std::vector<std::string>& a, const std::vector<std::string>& b);

}  // namespace tutorforge::analytics
