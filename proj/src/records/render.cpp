#include "tutorforge/records/render.hpp"

#include <map>

#include "tutorforge/core/text.hpp"

namespace tutorforge::records {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string heading(const std::string& section) {
  static const std::map<std::string, std::string> names = {
      {"answer", "Answer"},    {"summary", "Summary"}, {"changes", "What to change"},
      {"note", "Note"},        {"refusal", "Refused"}, {"lines", "Line by line"},
      {"example", "Example"}};
  const auto it = names.find(section);
  return it != names.end() ? it->second : section;
}

void sub_line(std::string& out, std::size_t indent, const std::string& explanation) {
  out += std::string(indent, ' ') + "> " + explanation + "\n";
}

const char* row_marker(const std::string& kind) {
  if (kind == "changed") return "~ ";
  if (kind == "removed") return "- ";
  if (kind == "added") return "+ ";
  return "  ";
}

}  // namespace

std::string render_text(const ResponseDocument& doc) {
  std::string out;
  for (const auto& segment : doc.segments) {
    if (!out.empty()) out += "\n";
    std::visit(overloaded{
                   [&](const Disclaimer& d) { out += "Note: " + d.text + "\n"; },
                   [&](const AnswerText& t) {
                     out += heading(t.section) + ":\n" + std::string(text::trim(t.text)) + "\n";
                   },
                   [&](const CodeListing& l) {
                     out += heading(l.section) + ":\n";
                     for (const auto& line : l.lines) {
                       out += "  " + line.text + "\n";
                       if (line.explanation) sub_line(out, 6, *line.explanation);
                     }
                   },
                   [&](const PseudoCode& p) {
                     out += "Pseudo-code:\n";
                     for (const auto& line : p.lines) {
                       const auto indent = 2 + 4 * line.depth;
                       out += std::string(indent, ' ') + line.text + "\n";
                       sub_line(out, indent + 4, line.explanation);
                     }
                   },
                   [&](const Annotated& a) {
                     out += "Your code, annotated:\n";
                     for (const auto& row : a.rows) {
                       out += std::string(row_marker(row.kind)) +
                              (row.kind == "added" ? std::string("(missing line)") : row.text) + "\n";
                       if (row.explanation) sub_line(out, 6, *row.explanation);
                     }
                   },
                   [&](const RelevantFunctions& f) {
                     out += "Relevant functions: " + text::join(f.names, ", ") + "\n";
                   },
                   [&](const SuggestedFollowUps& s) {
                     out += "Suggested follow-ups:\n";
                     for (std::size_t i = 0; i < s.items.size(); ++i) {
                       out += "  " + std::to_string(i + 1) + ". " + s.items[i] + "\n";
                     }
                   },
               },
               segment);
  }
  if (doc.finish == Finish::Truncated) out += "\n[response cut short at the length limit]\n";
  return out;
}

}  // namespace tutorforge::records
