#include "tutorforge/gateway/http_provider.hpp"

#include <httplib.h>

#include <json.hpp>

#include "tutorforge/gateway/sse.hpp"

namespace tutorforge::gateway {

using nlohmann::json;

ParsedEndpoint parse_endpoint(const std::string& endpoint) {
  std::string_view rest = endpoint;
  std::string scheme;
  if (rest.rfind("http://", 0) == 0) {
    scheme = "http://";
  } else if (rest.rfind("https://", 0) == 0) {
    scheme = "https://";
  } else {
    throw Error(ErrorCode::ConfigError, "endpoint must start with http:// or https://: " + endpoint);
  }
  rest.remove_prefix(scheme.size());
  const auto slash = rest.find('/');
  const auto authority = rest.substr(0, slash);
  if (authority.empty() || authority.front() == ':') {
    throw Error(ErrorCode::ConfigError, "endpoint has no host: " + endpoint);
  }
  if (const auto colon = authority.rfind(':'); colon != std::string_view::npos) {
    const auto port = authority.substr(colon + 1);
    if (port.empty() || port.find_first_not_of("0123456789") != std::string_view::npos) {
      throw Error(ErrorCode::ConfigError, "endpoint has a malformed port: " + endpoint);
    }
  }
  ParsedEndpoint parsed;
  parsed.scheme_host_port = scheme + std::string(authority);
  if (slash != std::string_view::npos) {
    parsed.base_path = std::string(rest.substr(slash));
    while (!parsed.base_path.empty() && parsed.base_path.back() == '/') parsed.base_path.pop_back();
  }
  return parsed;
}

HttpProvider::HttpProvider(HttpProviderConfig config)
    : config_(std::move(config)), endpoint_(parse_endpoint(config_.endpoint)) {}

std::string HttpProvider::request_body(const CompletionRequest& request) const {
  json body{{"model", config_.model}, {"stream", true}, {"temperature", config_.temperature.value_or(request.temperature)}};
  if (config_.style == ApiStyle::Chat) {
    body["messages"] = json::array({{{"role", "user"}, {"content", request.prompt}}});
  } else {
    body["prompt"] = request.prompt;
  }
  if (request.max_output_tokens) body["max_tokens"] = *request.max_output_tokens;
  // The hosted APIs accept at most four stop sequences.
  if (!request.stop_tokens.empty()) {
    auto stops = request.stop_tokens;
    if (stops.size() > 4) stops.resize(4);
    body["stop"] = stops;
  }
  return body.dump();
}

FinishReason HttpProvider::generate(const CompletionRequest& request,
                                    const FragmentSink& emit) const {
  httplib::Client client(endpoint_.scheme_host_port);
  client.set_connection_timeout(config_.connect_timeout_seconds, 0);
  client.set_read_timeout(config_.read_timeout_seconds, 0);

  httplib::Request req;
  req.method = "POST";
  req.path = endpoint_.base_path +
             (config_.style == ApiStyle::Chat ? "/chat/completions" : "/completions");
  req.set_header("Content-Type", "application/json");
  req.set_header("Accept", "text/event-stream");
  if (!config_.api_key.empty()) req.set_header("Authorization", "Bearer " + config_.api_key);
  req.body = request_body(request);

  int status = 0;
  std::string error_body;
  std::string emitted;
  std::string malformed;
  std::optional<FinishReason> finish;
  bool done = false;
  bool stop_requested = false;
  SseDecoder decoder;

  const auto handle_event = [&](const SseEvent& event) -> bool {
    if (event.data == "[DONE]") {
      done = true;
      return true;
    }
    json payload;
    try {
      payload = json::parse(event.data);
    } catch (const json::parse_error&) {
      malformed = "undecodable event data: " + event.data.substr(0, 200);
      return false;
    }
    const auto* choices = payload.contains("choices") ? &payload["choices"] : nullptr;
    if (!choices || !choices->is_array()) {
      malformed = "event without choices array";
      return false;
    }
    if (choices->empty()) return true;
    const auto& choice = (*choices)[0];
    std::string delta;
    if (config_.style == ApiStyle::Chat) {
      if (choice.contains("delta") && choice["delta"].contains("content") &&
          choice["delta"]["content"].is_string()) {
        delta = choice["delta"]["content"].get<std::string>();
      }
    } else if (choice.contains("text") && choice["text"].is_string()) {
      delta = choice["text"].get<std::string>();
    }
    if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
      finish = choice["finish_reason"] == "length" ? FinishReason::Length : FinishReason::Stop;
    }
    if (!delta.empty()) {
      emitted += delta;
      if (!emit(delta)) {
        stop_requested = true;
        return false;
      }
    }
    return true;
  };

  req.response_handler = [&](const httplib::Response& res) {
    status = res.status;
    return true;
  };
  req.content_receiver = [&](const char* data, size_t len, uint64_t, uint64_t) {
    if (status < 200 || status >= 300) {
      error_body.append(data, len);
      return true;
    }
    for (const auto& event : decoder.feed(std::string_view(data, len))) {
      if (!handle_event(event)) return false;
    }
    return true;
  };

  httplib::Response res;
  httplib::Error err = httplib::Error::Success;
  const bool ok = client.send(req, res, err);

  if (stop_requested) return FinishReason::Stop;
  if (!malformed.empty()) {
    throw ProviderError(ErrorCode::MalformedProviderResponse, malformed, status, {}, emitted);
  }
  if (status == 0) {
    throw ProviderError(ErrorCode::ProviderUnreachable,
                        "cannot reach " + endpoint_.scheme_host_port + ": " + httplib::to_string(err));
  }
  if (status < 200 || status >= 300) {
    if (error_body.empty()) error_body = res.body;
    throw ProviderError(ErrorCode::ProviderRefused,
                        "provider answered HTTP " + std::to_string(status), status, error_body);
  }
  if (ok && !done && !finish) {
    for (const auto& event : decoder.finish()) {
      if (!handle_event(event)) break;
    }
    if (stop_requested) return FinishReason::Stop;
  }
  if (!done && !finish) {
    throw ProviderError(ErrorCode::StreamAborted,
                        "stream ended before completion (" + httplib::to_string(err) + ")", status,
                        {}, emitted);
  }
  return finish.value_or(FinishReason::Stop);
}

std::shared_ptr<const Provider> http_provider(const std::string& endpoint,
                                              const std::string& credentials,
                                              const std::string& model_name, ApiStyle style) {
  HttpProviderConfig config;
  config.endpoint = endpoint;
  config.api_key = credentials;
  config.model = model_name;
  config.style = style;
  return std::make_shared<HttpProvider>(std::move(config));
}

}  // namespace tutorforge::gateway
