#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tutorforge/markup/events.hpp"
#include "tutorforge/markup/grammar.hpp"

namespace tutorforge::markup {

/// Incremental parser for marked-up model output.
///
/// Input is consumed byte by byte and every event is decided by the bytes seen
/// so far, never by where a chunk happens to end. Partial markers at the start
/// of a line are buffered until they either complete or diverge. Text in
/// single-line sections is released one word at a time (a fragment ends after
/// each whitespace byte); block lines are released whole.
class StreamParser {
 public:
  /// `expected_sections` lists section ids in the order the prompt asks for
  /// them. Unknown or out-of-order sections produce warnings. Empty means any
  /// order is accepted.
  explicit StreamParser(MarkupGrammar grammar, std::vector<std::string> expected_sections = {});

  /// Consumes a chunk. Must not be called after finalize().
  EventList feed(std::string_view chunk);

  /// Closes open sections. A second call returns an empty list.
  EventList finalize();

  [[nodiscard]] bool finalized() const noexcept { return finalized_; }

 private:
  enum class Mode { Outside, SingleLine, Block, Unstructured };

  struct Marker {
    std::string text;
    std::string section;
    enum class Kind { SingleLine, BlockBegin, BlockEnd } kind;
  };

  void consume(char c, EventList& out);
  void content(char c, EventList& out);
  void flush_probe(EventList& out);
  void on_marker(const Marker& marker, EventList& out);
  void open_section(const std::string& section, EventList& out);
  void complete_block_line(EventList& out);
  void emit_fragment(EventList& out);
  void close_current(EventList& out);

  MarkupGrammar grammar_;
  std::vector<std::string> expected_;
  std::vector<Marker> markers_;
  Mode mode_ = Mode::Outside;
  std::string section_;
  bool at_line_start_ = true;
  std::string probe_;
  std::string line_;
  std::string fragment_;
  bool single_line_started_ = false;
  std::ptrdiff_t expected_pos_ = -1;
  bool finalized_ = false;
};

/// Convenience: feed the whole document at once and finalize.
EventList parse_document(const MarkupGrammar& grammar, std::string_view document,
                         const std::vector<std::string>& expected_sections = {});

}  // namespace tutorforge::markup
