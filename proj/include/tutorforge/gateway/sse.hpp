#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tutorforge::gateway {

/// One server-sent event.
struct SseEvent {
  std::string event;  // empty means the default "message" type
  std::string data;
  bool operator==(const SseEvent&) const = default;
};

/// Frames an event; multi-line data becomes several "data:" lines.
std::string encode_sse(std::string_view event, std::string_view data);

/// Incremental decoder for a text/event-stream body.
class SseDecoder {
 public:
  std::vector<SseEvent> feed(std::string_view bytes);
  /// Dispatches a trailing event that was not followed by a blank line.
  std::vector<SseEvent> finish();

 private:
  void line(std::string_view text, std::vector<SseEvent>& out);
  void dispatch(std::vector<SseEvent>& out);

  std::string buffer_;
  std::string event_;
  std::string data_;
  bool has_data_ = false;
};

}  // namespace tutorforge::gateway
