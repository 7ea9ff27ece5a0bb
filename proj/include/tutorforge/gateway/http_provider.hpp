#pragma once

#include <memory>
#include <string>

#include "tutorforge/gateway/provider.hpp"

namespace tutorforge::gateway {

/// Wire schema of the remote endpoint.
enum class ApiStyle {
  Chat,         // POST {base}/chat/completions, choices[].delta.content
  Completions,  // POST {base}/completions, choices[].text
};

struct HttpProviderConfig {
  std::string endpoint;  // e.g. "https://api.openai.com/v1"
  std::string api_key;
  std::string model;
  ApiStyle style = ApiStyle::Chat;
  int connect_timeout_seconds = 10;
  int read_timeout_seconds = 120;
  std::optional<double> temperature;  // replaces the request's own when set
};

struct ParsedEndpoint {
  std::string scheme_host_port;  // "http://127.0.0.1:8080"
  std::string base_path;         // "/v1" or ""
};

/// Throws Error(ConfigError) unless `endpoint` is http(s)://host[:port][/path].
ParsedEndpoint parse_endpoint(const std::string& endpoint);

/// Streaming client for OpenAI-compatible endpoints (server-sent events).
///
/// Errors: ProviderUnreachable when no HTTP response arrives,
/// ProviderRefused for non-2xx (status and body preserved),
/// MalformedProviderResponse for undecodable events, StreamAborted when the
/// stream ends before the server signals completion (partial text kept).
class HttpProvider final : public Provider {
 public:
  explicit HttpProvider(HttpProviderConfig config);

  FinishReason generate(const CompletionRequest& request, const FragmentSink& emit) const override;
  [[nodiscard]] std::string name() const override { return "http:" + config_.model; }

  /// JSON request body for `request` (exposed for tests).
  [[nodiscard]] std::string request_body(const CompletionRequest& request) const;

 private:
  HttpProviderConfig config_;
  ParsedEndpoint endpoint_;
};

std::shared_ptr<const Provider> http_provider(const std::string& endpoint,
                                              const std::string& credentials,
                                              const std::string& model_name,
                                              ApiStyle style = ApiStyle::Chat);

}  // namespace tutorforge::gateway
