#include "tutorforge/markup/grammar.hpp"

#include <vector>

#include "tutorforge/core/error.hpp"

namespace tutorforge::markup {

namespace {

bool is_prefix(std::string_view prefix, std::string_view of) {
  return of.substr(0, prefix.size()) == prefix;
}

}  // namespace

void MarkupGrammar::validate() const {
  std::vector<std::pair<std::string, std::string>> markers;  // (marker, owner)
  for (const auto& [id, marker] : single_line_sections) markers.emplace_back(marker, id);
  for (const auto& [id, tokens] : block_sections) {
    markers.emplace_back(tokens.begin, id);
    markers.emplace_back(tokens.end, id);
  }
  for (const auto& id : plain_blocks) {
    if (!block_sections.count(id)) {
      throw Error(ErrorCode::AmbiguousGrammar, "plain block '" + id + "' is not a block section");
    }
  }
  if (line_explanation_separator.empty()) {
    throw Error(ErrorCode::AmbiguousGrammar, "empty line explanation separator");
  }
  for (std::size_t i = 0; i < markers.size(); ++i) {
    const auto& [m, owner] = markers[i];
    if (m.empty() || m.find('\n') != std::string::npos) {
      throw Error(ErrorCode::AmbiguousGrammar, "invalid marker for section '" + owner + "'");
    }
    if (m == line_explanation_separator) {
      throw Error(ErrorCode::AmbiguousGrammar, "marker equals separator: " + m);
    }
    for (std::size_t j = 0; j < markers.size(); ++j) {
      if (i == j) continue;
      if (is_prefix(m, markers[j].first)) {
        throw Error(ErrorCode::AmbiguousGrammar,
                    "marker '" + m + "' is a prefix of '" + markers[j].first + "'");
      }
    }
  }
}

std::string single_line_marker(std::string_view section) {
  return "// [" + std::string(section) + "]:";
}
std::string block_begin_marker(std::string_view section) {
  return "// [" + std::string(section) + "-start]";
}
std::string block_end_marker(std::string_view section) {
  return "// [" + std::string(section) + "-end]";
}

MarkupGrammar standard_grammar(const std::vector<std::string>& single_line,
                               const std::vector<std::string>& blocks,
                               const std::vector<std::string>& plain_blocks) {
  MarkupGrammar g;
  for (const auto& id : single_line) g.single_line_sections[id] = single_line_marker(id);
  for (const auto& id : blocks) {
    g.block_sections[id] = BlockTokens{block_begin_marker(id), block_end_marker(id)};
  }
  g.plain_blocks.insert(plain_blocks.begin(), plain_blocks.end());
  g.validate();
  return g;
}

const MarkupGrammar& default_grammar() {
  static const MarkupGrammar grammar = standard_grammar(
      {"refusal", "answer", "summary", "changes", "functions"},
      {"code", "fixed", "example", "pseudocode", "lines", "labels", "suggestions"},
      {"code", "fixed", "example"});
  return grammar;
}

}  // namespace tutorforge::markup
