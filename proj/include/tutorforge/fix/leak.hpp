#pragma once

#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tutorforge/fix/preprocess.hpp"

namespace tutorforge::fix {

/// Lines with fewer than two identifiers or numbers ("}", "i++;") say nothing
/// about the solution and are not guarded.
bool is_trivial_line(std::string_view normalized);

/// Detects lines of the fixed program that are missing from the buggy one
/// inside model-written text.
class LeakScanner {
 public:
  LeakScanner(const std::vector<SourceLine>& buggy, const std::vector<SourceLine>& fixed);

  /// Normalized fixed-only lines, trivial ones excluded.
  [[nodiscard]] const std::vector<std::string>& guarded() const noexcept { return guarded_; }

  /// The first guarded line occurring in `text` at word boundaries.
  [[nodiscard]] std::optional<std::string> find_leak(std::string_view text) const;

  /// Start of the longest suffix of already-normalized text that could still
  /// grow into a guarded line.
  [[nodiscard]] std::optional<std::size_t> leak_start(std::string_view normalized) const;

 private:
  std::vector<std::string> guarded_;
};

/// Releases streamed fragments only once they can no longer be the start of
/// a guarded line. Throws Error(GuardrailViolation) when the text received so
/// far contains one.
class GatedStream {
 public:
  explicit GatedStream(const LeakScanner& scanner) : scanner_(scanner) {}

  std::vector<std::string> push(std::string fragment);
  /// Releases whatever is still held.
  std::vector<std::string> finish();

  [[nodiscard]] const std::string& received() const noexcept { return received_; }

 private:
  const LeakScanner& scanner_;
  std::deque<std::string> pending_;
  std::string received_;
};

}  // namespace tutorforge::fix
