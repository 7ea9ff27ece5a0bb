#include "tutorforge/markup/keywords.hpp"

#include <algorithm>

#include "tutorforge/core/text.hpp"

namespace tutorforge::markup {

std::vector<KeywordSpan> extract_keywords(std::string_view text, char delimiter) {
  std::vector<KeywordSpan> spans;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find(delimiter, pos);
    if (open == std::string_view::npos) break;
    const auto close = text.find(delimiter, open + 1);
    if (close == std::string_view::npos) break;
    if (close > open + 1) {
      spans.push_back({open, close + 1, std::string(text.substr(open + 1, close - open - 1))});
    }
    pos = close + 1;
  }
  return spans;
}

std::vector<std::string> split_function_list(std::string_view text) {
  std::vector<std::string> names;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    auto name = text::trim(text.substr(pos, comma - pos));
    while (!name.empty() && (name.front() == '`' || name.front() == '\'')) name.remove_prefix(1);
    while (!name.empty() && (name.back() == '`' || name.back() == '\'' || name.back() == '.')) {
      name.remove_suffix(1);
    }
    if (name.size() > 2 && name.substr(name.size() - 2) == "()") name.remove_suffix(2);
    name = text::trim(name);
    if (!name.empty() && std::find(names.begin(), names.end(), name) == names.end()) {
      names.emplace_back(name);
    }
    pos = comma + 1;
  }
  return names;
}

}  // namespace tutorforge::markup
