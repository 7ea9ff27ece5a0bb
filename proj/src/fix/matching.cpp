#include "tutorforge/fix/matching.hpp"

#include <algorithm>
#include <cstdint>
#include <tuple>

namespace tutorforge::fix {

std::vector<MatchedPair> longest_common_lines(const std::vector<SourceLine>& buggy,
                                              const std::vector<SourceLine>& fixed) {
  const std::size_t n = buggy.size();
  const std::size_t m = fixed.size();
  // suffix(i, j): LCS length of buggy[i..] and fixed[j..].
  // Reused across calls; the exhaustive tests call this millions of times.
  thread_local std::vector<std::uint32_t> table;
  const std::size_t width = m + 1;
  table.assign((n + 1) * width, 0);
  const auto suffix = [&](std::size_t i, std::size_t j) -> std::uint32_t& {
    return table[i * width + j];
  };
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      suffix(i, j) = buggy[i].normalized == fixed[j].normalized
                         ? suffix(i + 1, j + 1) + 1
                         : std::max(suffix(i + 1, j), suffix(i, j + 1));
    }
  }
  std::vector<MatchedPair> pairs;
  std::size_t i = 0;
  std::size_t j = 0;
  while (suffix(i, j) > 0) {
    const auto need = suffix(i, j);
    bool found = false;
    for (std::size_t bi = i; bi < n && !found; ++bi) {
      if (suffix(bi, j) < need) break;
      for (std::size_t fj = j; fj < m; ++fj) {
        if (suffix(bi, fj) < need) break;
        if (buggy[bi].normalized == fixed[fj].normalized && suffix(bi + 1, fj + 1) + 1 == need) {
          pairs.push_back({bi, fj, PairKind::Equal});
          i = bi + 1;
          j = fj + 1;
          found = true;
          break;
        }
      }
    }
  }
  return pairs;
}

LineMatching match_lines(const std::vector<SourceLine>& buggy,
                         const std::vector<SourceLine>& fixed, double threshold) {
  const auto anchors = longest_common_lines(buggy, fixed);
  LineMatching matching;
  std::size_t bi = 0;
  std::size_t fj = 0;
  const auto fill_gap = [&](std::size_t b_end, std::size_t f_end) {
    std::size_t next_fixed = fj;
    for (std::size_t b = bi; b < b_end; ++b) {
      for (std::size_t f = next_fixed; f < f_end; ++f) {
        if (jaccard(buggy[b].tokens, fixed[f].tokens) >= threshold) {
          matching.pairs.push_back({b, f, PairKind::Modified});
          next_fixed = f + 1;
          break;
        }
      }
    }
  };
  for (const auto& pair : anchors) {
    fill_gap(pair.buggy, pair.fixed);
    matching.pairs.push_back(pair);
    bi = pair.buggy + 1;
    fj = pair.fixed + 1;
  }
  fill_gap(buggy.size(), fixed.size());
  return matching;
}

std::string_view to_string(LabelKind kind) noexcept {
  switch (kind) {
    case LabelKind::Changed: return "changed";
    case LabelKind::Removed: return "removed";
    case LabelKind::AddedPlaceholder: return "added";
  }
  return "changed";
}

std::vector<AnnotationLabel> annotate(const std::vector<SourceLine>& buggy,
                                      const std::vector<SourceLine>& fixed,
                                      const LineMatching& matching) {
  std::vector<AnnotationLabel> labels;
  std::vector<bool> buggy_matched(buggy.size(), false);
  std::vector<bool> fixed_matched(fixed.size(), false);
  for (const auto& pair : matching.pairs) {
    buggy_matched[pair.buggy] = true;
    fixed_matched[pair.fixed] = true;
    if (pair.kind == PairKind::Modified) {
      labels.push_back({"", LabelKind::Changed, pair.buggy, pair.fixed, ""});
    }
  }
  for (std::size_t b = 0; b < buggy.size(); ++b) {
    if (!buggy_matched[b]) labels.push_back({"", LabelKind::Removed, b, std::nullopt, ""});
  }
  for (std::size_t f = 0; f < fixed.size(); ++f) {
    if (fixed_matched[f]) continue;
    std::size_t gap = buggy.size();
    for (const auto& pair : matching.pairs) {
      if (pair.fixed > f) {
        gap = pair.buggy;
        break;
      }
    }
    labels.push_back({"", LabelKind::AddedPlaceholder, gap, f, ""});
  }
  const auto key = [](const AnnotationLabel& l) {
    return std::make_tuple(l.anchor, l.kind == LabelKind::AddedPlaceholder ? 0 : 1,
                           l.fixed_index.value_or(0));
  };
  std::stable_sort(labels.begin(), labels.end(),
                   [&](const auto& a, const auto& b) { return key(a) < key(b); });
  for (std::size_t k = 0; k < labels.size(); ++k) labels[k].id = "L" + std::to_string(k + 1);
  return labels;
}

}  // namespace tutorforge::fix
