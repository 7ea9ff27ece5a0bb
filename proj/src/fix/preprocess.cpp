#include "tutorforge/fix/preprocess.hpp"

#include <algorithm>
#include <cctype>

#include "tutorforge/core/text.hpp"

namespace tutorforge::fix {

namespace {

bool is_word(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool fusing_operator(char c) {
  return c == '+' || c == '-' || c == '&' || c == '|' || c == '<' || c == '>' || c == '=' ||
         c == '/' || c == '*';
}

// Length of the string or character literal starting at s[i] (a quote),
// stopping at an unescaped closing quote or the end of the line.
std::size_t literal_length(std::string_view s, std::size_t i) {
  const char quote = s[i];
  std::size_t j = i + 1;
  while (j < s.size() && s[j] != '\n') {
    if (s[j] == '\\' && j + 1 < s.size()) {
      j += 2;
      continue;
    }
    if (s[j] == quote) return j + 1 - i;
    ++j;
  }
  return j - i;
}

}  // namespace

StripResult strip_comments(std::string_view s) {
  StripResult out;
  out.text.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (c == '"' || c == '\'') {
      const auto n = literal_length(s, i);
      out.text.append(s.substr(i, n));
      i += n;
    } else if (c == '/' && i + 1 < s.size() && s[i + 1] == '/') {
      while (i < s.size() && s[i] != '\n') ++i;
    } else if (c == '/' && i + 1 < s.size() && s[i + 1] == '*') {
      const auto close = s.find("*/", i + 2);
      const auto end = close == std::string_view::npos ? s.size() : close + 2;
      const auto body = s.substr(i, end - i);
      const auto newlines = std::count(body.begin(), body.end(), '\n');
      if (newlines == 0 && !out.text.empty() && out.text.back() == '/') out.text += ' ';
      out.text.append(static_cast<std::size_t>(newlines), '\n');
      if (close == std::string_view::npos) out.unterminated_block_comment = true;
      i = end;
    } else {
      out.text += c;
      ++i;
    }
  }
  return out;
}

std::string reformat(std::string_view source) {
  std::vector<std::string> out;
  long depth = 0;
  bool pending_blank = false;
  for (const auto& line : text::split_lines(source)) {
    const auto t = text::trim(line);
    if (t.empty()) {
      pending_blank = !out.empty();
      continue;
    }
    long opens = 0;
    long closes = 0;
    for (std::size_t i = 0; i < t.size();) {
      const char c = t[i];
      if (c == '"' || c == '\'') {
        i += literal_length(t, i);
        continue;
      }
      if (c == '/' && i + 1 < t.size() && t[i + 1] == '/') break;
      if (c == '{') ++opens;
      if (c == '}') ++closes;
      ++i;
    }
    long leading = 0;
    for (char c : t) {
      if (c == '}') {
        ++leading;
      } else if (c != ' ' && c != '\t') {
        break;
      }
    }
    if (pending_blank) out.emplace_back();
    pending_blank = false;
    out.push_back(std::string(static_cast<std::size_t>(std::max(0L, depth - leading) * 4), ' ') +
                  std::string(t));
    depth = std::max(0L, depth + opens - closes);
  }
  std::string joined_text;
  for (const auto& l : out) {
    joined_text += l;
    joined_text += '\n';
  }
  return joined_text;
}

std::string normalize_line(std::string_view line) {
  std::string out;
  bool gap = false;
  for (std::size_t i = 0; i < line.size();) {
    const char c = line[i];
    if (text::is_space(c)) {
      gap = !out.empty();
      ++i;
      continue;
    }
    if (gap) {
      const char prev = out.back();
      if ((is_word(prev) && is_word(c)) || (fusing_operator(prev) && fusing_operator(c))) {
        out += ' ';
      }
      gap = false;
    }
    if (c == '"' || c == '\'') {
      const auto n = literal_length(line, i);
      out.append(line.substr(i, n));
      i += n;
      continue;
    }
    out += c;
    ++i;
  }
  return out;
}

std::vector<std::string> identifier_tokens(std::string_view line) {
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < line.size();) {
    const char c = line[i];
    if (c == '"' || c == '\'') {
      i += literal_length(line, i);
    } else if (is_word(c)) {
      std::size_t j = i;
      while (j < line.size() && is_word(line[j])) ++j;
      if (std::isdigit(static_cast<unsigned char>(c)) == 0) {
        tokens.emplace_back(line.substr(i, j - i));
      }
      i = j;
    } else {
      ++i;
    }
  }
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  return tokens;
}

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

SourceLine make_source_line(std::string raw, std::size_t index) {
  SourceLine line;
  line.normalized = normalize_line(raw);
  line.tokens = identifier_tokens(raw);
  line.raw = std::move(raw);
  line.index = index;
  return line;
}

PreparedSource prepare_source(std::string_view source) {
  PreparedSource prepared;
  const auto stripped = strip_comments(source);
  prepared.unterminated_block_comment = stripped.unterminated_block_comment;
  for (auto& line : text::split_lines(reformat(stripped.text))) {
    if (text::trim(line).empty()) continue;
    prepared.lines.push_back(make_source_line(std::move(line), prepared.lines.size()));
  }
  return prepared;
}

std::string joined(const std::vector<SourceLine>& lines) {
  std::string out;
  for (const auto& line : lines) {
    out += line.raw;
    out += '\n';
  }
  return out;
}

}  // namespace tutorforge::fix
