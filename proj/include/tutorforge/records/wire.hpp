#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "tutorforge/markup/events.hpp"
#include "tutorforge/records/document.hpp"

namespace tutorforge::records {

struct ResponseStarted {
  std::string response_id;
  std::string query_id;
  std::string feature;
  std::optional<std::string> parent;
  bool operator==(const ResponseStarted&) const = default;
};

struct ResponseCompleted {
  std::string response_id;
  Finish finish = Finish::Complete;
  bool operator==(const ResponseCompleted&) const = default;
};

/// Generation failed after the stream started; nothing was persisted.
struct StreamFailed {
  std::string error;  // ErrorCode name
  std::string message;
  bool operator==(const StreamFailed&) const = default;
};

using WireEvent = std::variant<ResponseStarted, markup::SectionStart, markup::TextDelta,
                               markup::LineCompleted, markup::SectionEnd,
                               markup::ProgressLineCount, markup::ParseWarning,
                               ResponseCompleted, StreamFailed>;

WireEvent to_wire(const markup::StreamEvent& event);

/// Server-sent event name: the event kind, e.g. "TextDelta".
std::string_view wire_name(const WireEvent& event) noexcept;

nlohmann::json to_json(const WireEvent& event);
WireEvent wire_from_json(const nlohmann::json& j);

/// One server-sent event frame; the data line is compact JSON.
std::string encode_wire(const WireEvent& event);

/// Parses a complete text/event-stream body. Throws Error(InvalidRequest) on
/// an unknown event or a payload that does not match its name.
std::vector<WireEvent> decode_wire(std::string_view body);

/// Rebuilds the response document from wire events alone.
class DocumentAssembler {
 public:
  void apply(const WireEvent& event);
  void apply_all(const std::vector<WireEvent>& events);

  [[nodiscard]] const ResponseDocument& document() const noexcept { return doc_; }
  [[nodiscard]] bool completed() const noexcept { return completed_; }
  [[nodiscard]] const std::optional<StreamFailed>& failure() const noexcept { return failure_; }
  [[nodiscard]] std::size_t progress() const noexcept { return progress_; }
  [[nodiscard]] const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  Segment* find(std::size_t type_index, const std::string& section);
  Segment& find_or_add(Segment fresh, const std::string& section);

  ResponseDocument doc_;
  bool completed_ = false;
  std::optional<StreamFailed> failure_;
  std::size_t progress_ = 0;
  std::vector<std::string> warnings_;
};

}  // namespace tutorforge::records
