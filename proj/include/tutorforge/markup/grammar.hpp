#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace tutorforge::markup {

struct BlockTokens {
  std::string begin;
  std::string end;
  bool operator==(const BlockTokens&) const = default;
};

/// Section markers recognized at the start of a line.
///
/// Single-line sections carry their content on the marker line. Block
/// sections span the lines between a begin and an end token; each line may
/// carry an explanation after the separator unless the block is plain.
struct MarkupGrammar {
  std::map<std::string, std::string> single_line_sections;
  std::map<std::string, BlockTokens> block_sections;
  std::set<std::string> plain_blocks;
  std::string line_explanation_separator = "///";
  char keyword_delimiter = '`';

  /// Throws Error(AmbiguousGrammar) if a marker is empty, contains a newline,
  /// duplicates or prefixes another marker, or collides with the separator.
  void validate() const;

  bool operator==(const MarkupGrammar&) const = default;
};

/// Marker spelling used by the bundled prompts.
std::string single_line_marker(std::string_view section);
std::string block_begin_marker(std::string_view section);
std::string block_end_marker(std::string_view section);

/// Grammar built from the standard spelling:
/// single-line "// [id]:", blocks "// [id-start]" / "// [id-end]".
MarkupGrammar standard_grammar(const std::vector<std::string>& single_line,
                               const std::vector<std::string>& blocks,
                               const std::vector<std::string>& plain_blocks = {});

/// Grammar covering every section used by the bundled prompts.
const MarkupGrammar& default_grammar();

/// Synthetic section that receives text found outside any marker.
inline constexpr std::string_view kUnstructuredSection = "unstructured";

}  // namespace tutorforge::markup
