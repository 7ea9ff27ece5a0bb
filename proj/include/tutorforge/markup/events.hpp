#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace tutorforge::markup {

struct SectionStart {
  std::string section;
  bool operator==(const SectionStart&) const = default;
};

struct TextDelta {
  std::string section;
  std::string fragment;
  bool operator==(const TextDelta&) const = default;
};

struct LineCompleted {
  std::string section;
  std::string visible;
  std::optional<std::string> explanation;
  // Row label assigned by orchestrators (e.g. "changed"); the parser leaves it empty.
  std::string tag;
  bool operator==(const LineCompleted&) const = default;
};

struct SectionEnd {
  std::string section;
  bool operator==(const SectionEnd&) const = default;
};

struct ProgressLineCount {
  std::size_t count = 0;
  bool operator==(const ProgressLineCount&) const = default;
};

struct ParseWarning {
  std::string detail;
  bool operator==(const ParseWarning&) const = default;
};

using StreamEvent = std::variant<SectionStart, TextDelta, LineCompleted, SectionEnd,
                                 ProgressLineCount, ParseWarning>;
using EventList = std::vector<StreamEvent>;

/// Event kind name, used as the server-sent event name.
const char* kind_name(const StreamEvent& event) noexcept;

/// One-line debug rendering, e.g. `LineCompleted(pseudocode, "x", "y")`.
std::string describe(const StreamEvent& event);

}  // namespace tutorforge::markup
