#include "tutorforge/markup/events.hpp"

#include <sstream>

namespace tutorforge::markup {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '\n') out += "\\n";
    else if (c == '\r') out += "\\r";
    else if (c == '\t') out += "\\t";
    else if (c == '\\') out += "\\\\";
    else if (c == '"') out += "\\\"";
    else out += c;
  }
  return out + "\"";
}

}  // namespace

const char* kind_name(const StreamEvent& event) noexcept {
  static constexpr const char* names[] = {"SectionStart",  "TextDelta",         "LineCompleted",
                                          "SectionEnd",    "ProgressLineCount", "ParseWarning"};
  return names[event.index()];
}

std::string describe(const StreamEvent& event) {
  std::ostringstream out;
  out << kind_name(event) << '(';
  std::visit(overloaded{
                 [&](const SectionStart& e) { out << e.section; },
                 [&](const TextDelta& e) { out << e.section << ", " << quoted(e.fragment); },
                 [&](const LineCompleted& e) {
                   out << e.section << ", " << quoted(e.visible);
                   if (e.explanation) out << ", " << quoted(*e.explanation);
                   if (!e.tag.empty()) out << ", tag=" << e.tag;
                 },
                 [&](const SectionEnd& e) { out << e.section; },
                 [&](const ProgressLineCount& e) { out << e.count; },
                 [&](const ParseWarning& e) { out << quoted(e.detail); },
             },
             event);
  out << ')';
  return out.str();
}

}  // namespace tutorforge::markup
