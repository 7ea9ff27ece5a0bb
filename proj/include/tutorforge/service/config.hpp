#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "tutorforge/gateway/provider.hpp"
#include "tutorforge/prompts/library.hpp"

namespace tutorforge::service {

struct ProviderSettings {
  std::string kind = "scripted";  // "scripted" | "http"
  std::filesystem::path script;   // scripted: ScriptTable JSON
  std::string endpoint;           // http
  std::string model;
  std::string style = "chat";     // "chat" | "completions"
  int connect_timeout_seconds = 10;
  int read_timeout_seconds = 120;
  std::optional<double> temperature;  // http: overrides the per-call default
};

struct ThrottleSettings {
  double capacity = 10;
  double refill_per_hour = 10;
};

/// Service configuration, read from a JSON file. Relative paths resolve
/// against the directory of that file. Secrets never live here: the provider
/// key comes from TUTORFORGE_LLM_KEY and the pseudonym salt from
/// TUTORFORGE_PSEUDONYM_SALT.
struct ServiceConfig {
  ProviderSettings provider;
  ThrottleSettings throttle;
  prompts::InputLimits limits;
  std::optional<int> max_output_tokens = 1024;
  std::filesystem::path prompts_dir;
  std::filesystem::path docstore;
  std::filesystem::path log;          // empty keeps records in memory only
  std::filesystem::path credentials;  // token table
  std::string version = "v2";
  int utc_offset_minutes = 0;
  std::size_t smoothing_window = 7;
  std::string host = "127.0.0.1";
  int port = 8080;
};

/// Defaults pointing at a data directory laid out like the repository's.
ServiceConfig default_config(const std::filesystem::path& data_dir);

/// Errors: ConfigError (with the offending key), IoError.
ServiceConfig load_config(const std::filesystem::path& path,
                          const std::filesystem::path& data_dir);
ServiceConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir,
                           const std::filesystem::path& data_dir);

/// Provider described by the settings; the http kind reads its key from the
/// environment.
std::shared_ptr<const gateway::Provider> make_provider(const ProviderSettings& settings);

inline constexpr const char* kLlmKeyVariable = "TUTORFORGE_LLM_KEY";
inline constexpr const char* kSaltVariable = "TUTORFORGE_PSEUDONYM_SALT";

}  // namespace tutorforge::service
