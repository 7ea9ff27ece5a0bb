#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tutorforge::fix {

struct StripResult {
  std::string text;
  bool unterminated_block_comment = false;
};

/// Removes // and /* */ comments outside string and character literals.
/// A block comment leaves only its newlines behind so line numbers stay put.
/// An unterminated block comment swallows the rest of the input and is
/// reported through the flag.
StripResult strip_comments(std::string_view source);

/// Canonical layout: each line re-indented to brace depth * 4 spaces,
/// trailing whitespace removed, blank-line runs collapsed to one and blank
/// lines at either end dropped. Idempotent.
std::string reformat(std::string_view source);

/// Comparison key for a line: whitespace outside literals is dropped except a
/// single space between two word characters (or two operator characters that
/// would otherwise fuse).
std::string normalize_line(std::string_view line);

/// Sorted distinct identifiers (keywords included) outside literals.
std::vector<std::string> identifier_tokens(std::string_view line);

/// |a ∩ b| / |a ∪ b| over sorted distinct sets; 0 when both are empty.
double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b);

struct SourceLine {
  std::string raw;         // reformatted text shown to the student
  std::string normalized;  // normalize_line(raw)
  std::size_t index = 0;
  std::vector<std::string> tokens;  // identifier_tokens(raw)
};

SourceLine make_source_line(std::string raw, std::size_t index);

struct PreparedSource {
  std::vector<SourceLine> lines;
  bool unterminated_block_comment = false;
};

/// strip_comments, reformat, then drop blank lines.
PreparedSource prepare_source(std::string_view source);

/// The prepared lines joined back into text.
std::string joined(const std::vector<SourceLine>& lines);

}  // namespace tutorforge::fix
