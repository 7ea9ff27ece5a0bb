#include "tutorforge/markup/parser.hpp"

#include <algorithm>
#include <stdexcept>

#include "tutorforge/core/text.hpp"

namespace tutorforge::markup {

namespace {

std::string_view trim_indent(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return s.substr(i);
}

bool looks_like_code(std::string_view explanation) {
  const auto t = text::trim(explanation);
  if (t.empty()) return false;
  const char last = t.back();
  return last == ';' || last == '{' || last == '}' || t.find(");") != std::string_view::npos;
}

}  // namespace

StreamParser::StreamParser(MarkupGrammar grammar, std::vector<std::string> expected_sections)
    : grammar_(std::move(grammar)), expected_(std::move(expected_sections)) {
  grammar_.validate();
  for (const auto& [id, marker] : grammar_.single_line_sections) {
    markers_.push_back({marker, id, Marker::Kind::SingleLine});
  }
  for (const auto& [id, tokens] : grammar_.block_sections) {
    markers_.push_back({tokens.begin, id, Marker::Kind::BlockBegin});
    markers_.push_back({tokens.end, id, Marker::Kind::BlockEnd});
  }
}

EventList StreamParser::feed(std::string_view chunk) {
  if (finalized_) throw std::logic_error("StreamParser::feed called after finalize");
  EventList out;
  for (char c : chunk) consume(c, out);
  return out;
}

EventList StreamParser::finalize() {
  if (finalized_) return {};
  EventList out;
  if (!probe_.empty()) flush_probe(out);
  switch (mode_) {
    case Mode::SingleLine:
    case Mode::Unstructured:
      emit_fragment(out);
      out.push_back(SectionEnd{section_});
      break;
    case Mode::Block:
      if (!line_.empty()) complete_block_line(out);
      out.push_back(SectionEnd{section_});
      out.push_back(ParseWarning{"unterminated section '" + section_ + "'"});
      break;
    case Mode::Outside:
      break;
  }
  mode_ = Mode::Outside;
  finalized_ = true;
  return out;
}

void StreamParser::consume(char c, EventList& out) {
  if (!at_line_start_ || mode_ == Mode::SingleLine) {
    content(c, out);
    return;
  }
  probe_ += c;
  if (c == '\n') {
    flush_probe(out);
    return;
  }
  const auto head = trim_indent(probe_);
  if (head.empty()) return;
  bool ambiguous = false;
  for (const auto& marker : markers_) {
    if (marker.text.compare(0, head.size(), head) != 0) continue;
    if (marker.text.size() == head.size()) {
      probe_.clear();
      at_line_start_ = false;
      on_marker(marker, out);
      return;
    }
    ambiguous = true;
  }
  if (!ambiguous) flush_probe(out);
}

void StreamParser::flush_probe(EventList& out) {
  const std::string pending = std::move(probe_);
  probe_.clear();
  at_line_start_ = false;
  for (char c : pending) content(c, out);
}

void StreamParser::content(char c, EventList& out) {
  switch (mode_) {
    case Mode::Outside:
      if (c == '\n') {
        at_line_start_ = true;
        return;
      }
      if (text::is_space(c)) return;
      out.push_back(ParseWarning{"text outside of any section"});
      mode_ = Mode::Unstructured;
      section_ = std::string(kUnstructuredSection);
      out.push_back(SectionStart{section_});
      fragment_ += c;
      return;
    case Mode::Unstructured:
      fragment_ += c;
      if (text::is_space(c)) emit_fragment(out);
      if (c == '\n') at_line_start_ = true;
      return;
    case Mode::SingleLine:
      if (c == '\n') {
        emit_fragment(out);
        out.push_back(SectionEnd{section_});
        mode_ = Mode::Outside;
        at_line_start_ = true;
        return;
      }
      if (!single_line_started_ && text::is_space(c)) return;
      single_line_started_ = true;
      fragment_ += c;
      if (text::is_space(c)) emit_fragment(out);
      return;
    case Mode::Block:
      if (c == '\n') {
        complete_block_line(out);
        at_line_start_ = true;
        return;
      }
      line_ += c;
      return;
  }
}

void StreamParser::on_marker(const Marker& marker, EventList& out) {
  if (marker.kind == Marker::Kind::BlockEnd) {
    if (mode_ == Mode::Block && section_ == marker.section) {
      out.push_back(SectionEnd{section_});
      mode_ = Mode::Outside;
    } else {
      out.push_back(ParseWarning{"unexpected end marker for section '" + marker.section + "'"});
    }
    return;
  }
  if (mode_ == Mode::Block) {
    const std::string open = section_;
    out.push_back(SectionEnd{open});
    out.push_back(ParseWarning{"section '" + open + "' not terminated before '" +
                               marker.section + "'"});
  } else {
    close_current(out);
  }
  open_section(marker.section, out);
  if (marker.kind == Marker::Kind::SingleLine) {
    mode_ = Mode::SingleLine;
    single_line_started_ = false;
  } else {
    mode_ = Mode::Block;
  }
}

void StreamParser::open_section(const std::string& section, EventList& out) {
  if (!expected_.empty()) {
    const auto it = std::find(expected_.begin(), expected_.end(), section);
    if (it == expected_.end()) {
      out.push_back(ParseWarning{"unexpected section '" + section + "'"});
    } else {
      const auto pos = it - expected_.begin();
      if (pos < expected_pos_) {
        out.push_back(ParseWarning{"section '" + section + "' out of order"});
      } else {
        expected_pos_ = pos;
      }
    }
  }
  section_ = section;
  out.push_back(SectionStart{section_});
}

void StreamParser::close_current(EventList& out) {
  if (mode_ == Mode::Unstructured) {
    emit_fragment(out);
    out.push_back(SectionEnd{section_});
  }
  mode_ = Mode::Outside;
}

void StreamParser::complete_block_line(EventList& out) {
  const std::string line = std::move(line_);
  line_.clear();
  if (text::trim(line).empty()) return;
  LineCompleted event;
  event.section = section_;
  const auto& sep = grammar_.line_explanation_separator;
  const auto pos = grammar_.plain_blocks.count(section_) ? std::string::npos : line.find(sep);
  if (pos == std::string::npos) {
    event.visible = std::string(text::trim_right(line));
  } else {
    event.visible = std::string(text::trim_right(std::string_view(line).substr(0, pos)));
    event.explanation = std::string(text::trim(std::string_view(line).substr(pos + sep.size())));
  }
  const bool suspicious = event.explanation && looks_like_code(*event.explanation);
  out.push_back(std::move(event));
  if (suspicious) {
    out.push_back(ParseWarning{"explanation after separator looks like code in section '" +
                               section_ + "'"});
  }
}

void StreamParser::emit_fragment(EventList& out) {
  if (fragment_.empty()) return;
  out.push_back(TextDelta{section_, std::move(fragment_)});
  fragment_.clear();
}

EventList parse_document(const MarkupGrammar& grammar, std::string_view document,
                         const std::vector<std::string>& expected_sections) {
  StreamParser parser(grammar, expected_sections);
  auto events = parser.feed(document);
  auto tail = parser.finalize();
  events.insert(events.end(), std::make_move_iterator(tail.begin()),
                std::make_move_iterator(tail.end()));
  return events;
}

}  // namespace tutorforge::markup
