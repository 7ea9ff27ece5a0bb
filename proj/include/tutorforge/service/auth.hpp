#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace tutorforge::service {

enum class Role { Student, Admin };

std::string_view to_string(Role role) noexcept;
std::optional<Role> parse_role(std::string_view text) noexcept;

/// Who is calling. A session is keyed by its bearer token.
struct Identity {
  std::string session;
  std::string user;
  Role role = Role::Student;
  bool operator==(const Identity&) const = default;
};

/// Static credential table:
/// {"tokens": [{"token": "...", "user": "...", "role": "student"}]}.
class Credentials {
 public:
  Credentials() = default;
  /// Errors: ConfigError for malformed entries or duplicate tokens.
  static Credentials from_json_text(const std::string& text);
  static Credentials load(const std::filesystem::path& path);

  void add(std::string token, std::string user, Role role);
  /// Identity for a token; Unauthorized when unknown or empty.
  [[nodiscard]] Identity authenticate(std::string_view token) const;
  /// Identity from an "Authorization: Bearer <token>" header value.
  [[nodiscard]] Identity authenticate_header(std::string_view header) const;
  [[nodiscard]] std::size_t size() const noexcept { return table_.size(); }

 private:
  std::map<std::string, std::pair<std::string, Role>, std::less<>> table_;
};

}  // namespace tutorforge::service
