#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace tutorforge::markup {

/// A delimited keyword. [start, end) covers the delimiters too.
struct KeywordSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string keyword;
  bool operator==(const KeywordSpan&) const = default;
};

/// Left-to-right pairing of delimiters. An unpaired trailing delimiter leaves
/// the rest of the text plain; empty pairs yield no span.
std::vector<KeywordSpan> extract_keywords(std::string_view text, char delimiter = '`');

}  // namespace tutorforge::markup

namespace tutorforge::markup {

/// Splits a comma-separated function list such as "`printf()`, scanf".
/// Delimiters and a trailing "()" are dropped; duplicates keep their first
/// position.
std::vector<std::string> split_function_list(std::string_view text);

}  // namespace tutorforge::markup
