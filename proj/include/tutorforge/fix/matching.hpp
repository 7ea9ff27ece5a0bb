#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tutorforge/fix/preprocess.hpp"

namespace tutorforge::fix {

enum class PairKind { Equal, Modified };

struct MatchedPair {
  std::size_t buggy = 0;
  std::size_t fixed = 0;
  PairKind kind = PairKind::Equal;
  bool operator==(const MatchedPair&) const = default;
};

/// Order-preserving pairs, strictly increasing on both sides.
struct LineMatching {
  std::vector<MatchedPair> pairs;
};

/// Minimum identifier-token Jaccard for pairing two differing lines.
inline constexpr double kModifiedThreshold = 0.5;

/// Longest common subsequence of normalized lines. Among longest ones the
/// buggy index sequence is lexicographically smallest, then the fixed one.
std::vector<MatchedPair> longest_common_lines(const std::vector<SourceLine>& buggy,
                                              const std::vector<SourceLine>& fixed);

/// LCS pairs, then inside each gap between them unmatched lines are paired
/// front to back when their token similarity reaches the threshold.
LineMatching match_lines(const std::vector<SourceLine>& buggy,
                         const std::vector<SourceLine>& fixed,
                         double threshold = kModifiedThreshold);

enum class LabelKind { Changed, Removed, AddedPlaceholder };

std::string_view to_string(LabelKind kind) noexcept;

struct AnnotationLabel {
  std::string id;  // "L1", "L2", ... in sorted order
  LabelKind kind = LabelKind::Changed;
  /// Buggy line for Changed/Removed; for placeholders the gap before buggy
  /// line `anchor` (== buggy size for the end).
  std::size_t anchor = 0;
  std::optional<std::size_t> fixed_index;  // set for Changed and placeholders
  std::string explanation;
};

/// Labels sorted by anchor, a placeholder ahead of the buggy line it precedes.
std::vector<AnnotationLabel> annotate(const std::vector<SourceLine>& buggy,
                                      const std::vector<SourceLine>& fixed,
                                      const LineMatching& matching);

}  // namespace tutorforge::fix
