#include "tutorforge/fix/leak.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "tutorforge/core/error.hpp"

namespace tutorforge::fix {

namespace {

bool is_word(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

}  // namespace

bool is_trivial_line(std::string_view normalized) {
  std::size_t words = 0;
  for (std::size_t i = 0; i < normalized.size();) {
    if (is_word(normalized[i])) {
      ++words;
      while (i < normalized.size() && is_word(normalized[i])) ++i;
    } else {
      ++i;
    }
  }
  return words < 2;
}

LeakScanner::LeakScanner(const std::vector<SourceLine>& buggy,
                         const std::vector<SourceLine>& fixed) {
  std::set<std::string> present;
  for (const auto& line : buggy) present.insert(line.normalized);
  std::set<std::string> seen;
  for (const auto& line : fixed) {
    if (present.count(line.normalized) || is_trivial_line(line.normalized)) continue;
    if (seen.insert(line.normalized).second) guarded_.push_back(line.normalized);
  }
}

std::optional<std::string> LeakScanner::find_leak(std::string_view text) const {
  if (guarded_.empty()) return std::nullopt;
  const auto search = [this](const std::string& haystack) -> std::optional<std::string> {
    for (const auto& line : guarded_) {
      for (auto pos = haystack.find(line); pos != std::string::npos;
           pos = haystack.find(line, pos + 1)) {
        const bool left_ok = pos == 0 || !is_word(line.front()) || !is_word(haystack[pos - 1]);
        const auto end = pos + line.size();
        const bool right_ok =
            end == haystack.size() || !is_word(line.back()) || !is_word(haystack[end]);
        if (left_ok && right_ok) return line;
      }
    }
    return std::nullopt;
  };
  // Guarded lines are comment-free, so a quote with comments inside it only
  // matches once they are gone. The raw text is searched too because a "//"
  // in prose would hide everything after it.
  if (auto hit = search(normalize_line(text))) return hit;
  return search(normalize_line(strip_comments(text).text));
}

std::optional<std::size_t> LeakScanner::leak_start(std::string_view normalized) const {
  for (std::size_t p = 0; p < normalized.size(); ++p) {
    const auto rest = normalized.substr(p);
    for (const auto& line : guarded_) {
      if (is_word(line.front()) && p > 0 && is_word(normalized[p - 1])) continue;
      if (rest.size() < line.size() && line.compare(0, rest.size(), rest) == 0) return p;
    }
  }
  return std::nullopt;
}

std::vector<std::string> GatedStream::push(std::string fragment) {
  received_ += fragment;
  if (auto leak = scanner_.find_leak(received_)) {
    throw Error(ErrorCode::GuardrailViolation, "change summary quotes fixed code: " + *leak);
  }
  pending_.push_back(std::move(fragment));
  if (scanner_.guarded().empty()) return finish();

  // Hold from the earliest fragment in which a possible guarded line starts.
  std::vector<std::string> tails(pending_.size() + 1);
  for (std::size_t k = pending_.size(); k-- > 0;) tails[k] = pending_[k] + tails[k + 1];
  std::size_t hold = pending_.size();
  for (std::size_t k = 0; k < pending_.size(); ++k) {
    const auto here = normalize_line(tails[k]);
    const auto later = normalize_line(tails[k + 1]);
    const auto own = here.size() > later.size() ? here.size() - later.size() : 0;
    const auto start = scanner_.leak_start(here);
    if (start && *start < own) {
      hold = k;
      break;
    }
  }
  std::vector<std::string> released;
  for (std::size_t k = 0; k < hold; ++k) {
    released.push_back(std::move(pending_.front()));
    pending_.pop_front();
  }
  return released;
}

std::vector<std::string> GatedStream::finish() {
  std::vector<std::string> released(std::make_move_iterator(pending_.begin()),
                                    std::make_move_iterator(pending_.end()));
  pending_.clear();
  return released;
}

}  // namespace tutorforge::fix
