#include "tutorforge/service/auth.hpp"

#include <json.hpp>

#include "tutorforge/core/error.hpp"
#include "tutorforge/core/text.hpp"

namespace tutorforge::service {

std::string_view to_string(Role role) noexcept {
  return role == Role::Admin ? "admin" : "student";
}

std::optional<Role> parse_role(std::string_view text) noexcept {
  if (text == "admin") return Role::Admin;
  if (text == "student") return Role::Student;
  return std::nullopt;
}

Credentials Credentials::from_json_text(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, std::string("credentials are not valid JSON: ") + e.what());
  }
  if (!root.is_object() || !root.contains("tokens") || !root["tokens"].is_array()) {
    throw Error(ErrorCode::ConfigError, "credentials need a \"tokens\" array");
  }
  Credentials c;
  std::size_t index = 0;
  for (const auto& entry : root["tokens"]) {
    const auto where = "credentials entry " + std::to_string(index++);
    if (!entry.is_object() || !entry.contains("token") || !entry.contains("user") ||
        !entry["token"].is_string() || !entry["user"].is_string()) {
      throw Error(ErrorCode::ConfigError, where + ": needs string token and user");
    }
    const auto role_text = entry.value("role", std::string("student"));
    const auto role = parse_role(role_text);
    if (!role) throw Error(ErrorCode::ConfigError, where + ": unknown role '" + role_text + "'");
    c.add(entry["token"].get<std::string>(), entry["user"].get<std::string>(), *role);
  }
  return c;
}

Credentials Credentials::load(const std::filesystem::path& path) {
  return from_json_text(text::read_file(path));
}

void Credentials::add(std::string token, std::string user, Role role) {
  if (token.empty() || user.empty()) {
    throw Error(ErrorCode::ConfigError, "credential token and user must be non-empty");
  }
  if (!table_.emplace(std::move(token), std::make_pair(std::move(user), role)).second) {
    throw Error(ErrorCode::ConfigError, "duplicate credential token");
  }
}

Identity Credentials::authenticate(std::string_view token) const {
  const auto it = token.empty() ? table_.end() : table_.find(token);
  if (it == table_.end()) throw Error(ErrorCode::Unauthorized, "unknown or missing token");
  return {std::string(token), it->second.first, it->second.second};
}

Identity Credentials::authenticate_header(std::string_view header) const {
  constexpr std::string_view kPrefix = "Bearer ";
  if (header.substr(0, kPrefix.size()) != kPrefix) {
    throw Error(ErrorCode::Unauthorized, "expected a bearer token");
  }
  return authenticate(text::trim(header.substr(kPrefix.size())));
}

}  // namespace tutorforge::service
