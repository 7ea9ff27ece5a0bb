#include "tutorforge/service/config.hpp"

#include <cstdlib>

#include <json.hpp>

#include "tutorforge/core/error.hpp"
#include "tutorforge/core/text.hpp"
#include "tutorforge/gateway/http_provider.hpp"
#include "tutorforge/gateway/scripted.hpp"

namespace tutorforge::service {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw Error(ErrorCode::ConfigError, "config key '" + key + "': " + why);
}

template <typename T>
void read(const json& obj, const char* key, const std::string& where, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    bad(where + key, "wrong type");
  }
}

void read_path(const json& obj, const char* key, const std::string& where,
               const std::filesystem::path& base, std::filesystem::path& out) {
  std::string value;
  if (!obj.contains(key)) return;
  read(obj, key, where, value);
  if (value.empty()) {
    out.clear();
    return;
  }
  const std::filesystem::path p(value);
  out = p.is_absolute() ? p : base / p;
}

const json& section(const json& root, const char* key) {
  static const json empty = json::object();
  if (!root.contains(key)) return empty;
  if (!root.at(key).is_object()) bad(key, "must be an object");
  return root.at(key);
}

}  // namespace

ServiceConfig default_config(const std::filesystem::path& data_dir) {
  ServiceConfig c;
  c.prompts_dir = data_dir / "prompts";
  c.docstore = data_dir / "docs" / "store.json";
  return c;
}

ServiceConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir,
                           const std::filesystem::path& data_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");

  ServiceConfig c = default_config(data_dir);
  const auto& p = section(root, "provider");
  read(p, "kind", "provider.", c.provider.kind);
  read_path(p, "script", "provider.", base_dir, c.provider.script);
  read(p, "endpoint", "provider.", c.provider.endpoint);
  read(p, "model", "provider.", c.provider.model);
  read(p, "style", "provider.", c.provider.style);
  read(p, "connect_timeout_seconds", "provider.", c.provider.connect_timeout_seconds);
  read(p, "read_timeout_seconds", "provider.", c.provider.read_timeout_seconds);
  if (p.contains("temperature")) {
    double t = 0;
    read(p, "temperature", "provider.", t);
    if (!(t >= 0.0 && t <= 2.0)) bad("provider.temperature", "outside 0..2");
    c.provider.temperature = t;
  }
  if (c.provider.kind != "scripted" && c.provider.kind != "http") {
    bad("provider.kind", "expected \"scripted\" or \"http\"");
  }
  if (c.provider.style != "chat" && c.provider.style != "completions") {
    bad("provider.style", "expected \"chat\" or \"completions\"");
  }

  const auto& t = section(root, "throttle");
  read(t, "capacity", "throttle.", c.throttle.capacity);
  read(t, "refill_per_hour", "throttle.", c.throttle.refill_per_hour);
  if (c.throttle.capacity < 1) bad("throttle.capacity", "must be at least 1");
  if (c.throttle.refill_per_hour <= 0) bad("throttle.refill_per_hour", "must be positive");

  const auto& l = section(root, "limits");
  read(l, "question_chars", "limits.", c.limits.question_chars);
  read(l, "code_lines", "limits.", c.limits.code_lines);

  if (root.contains("max_output_tokens")) {
    if (root["max_output_tokens"].is_null()) {
      c.max_output_tokens.reset();
    } else {
      int n = 0;
      read(root, "max_output_tokens", "", n);
      if (n <= 0) bad("max_output_tokens", "must be positive");
      c.max_output_tokens = n;
    }
  }

  const auto& paths = section(root, "paths");
  read_path(paths, "prompts", "paths.", base_dir, c.prompts_dir);
  read_path(paths, "docstore", "paths.", base_dir, c.docstore);
  read_path(paths, "log", "paths.", base_dir, c.log);
  read_path(paths, "credentials", "paths.", base_dir, c.credentials);

  read(root, "version", "", c.version);
  read(root, "utc_offset_minutes", "", c.utc_offset_minutes);
  read(root, "smoothing_window", "", c.smoothing_window);
  if (c.smoothing_window == 0) bad("smoothing_window", "must be at least 1");
  if (c.utc_offset_minutes < -14 * 60 || c.utc_offset_minutes > 14 * 60) {
    bad("utc_offset_minutes", "outside -840..840");
  }

  const auto& s = section(root, "server");
  read(s, "host", "server.", c.host);
  read(s, "port", "server.", c.port);
  if (c.port < 0 || c.port > 65535) bad("server.port", "outside 0..65535");
  return c;
}

ServiceConfig load_config(const std::filesystem::path& path, const std::filesystem::path& data_dir) {
  return parse_config(text::read_file(path), path.parent_path(), data_dir);
}

std::shared_ptr<const gateway::Provider> make_provider(const ProviderSettings& settings) {
  if (settings.kind == "scripted") {
    if (settings.script.empty()) bad("provider.script", "required for the scripted provider");
    return gateway::scripted_provider(gateway::ScriptTable::load(settings.script));
  }
  if (settings.endpoint.empty()) bad("provider.endpoint", "required for the http provider");
  if (settings.model.empty()) bad("provider.model", "required for the http provider");
  gateway::HttpProviderConfig http;
  http.endpoint = settings.endpoint;
  http.model = settings.model;
  http.style = settings.style == "chat" ? gateway::ApiStyle::Chat : gateway::ApiStyle::Completions;
  http.connect_timeout_seconds = settings.connect_timeout_seconds;
  http.read_timeout_seconds = settings.read_timeout_seconds;
  http.temperature = settings.temperature;
  if (const char* key = std::getenv(kLlmKeyVariable)) http.api_key = key;
  return std::make_shared<gateway::HttpProvider>(std::move(http));
}

}  // namespace tutorforge::service
