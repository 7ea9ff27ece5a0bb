#include "tutorforge/service/http_server.hpp"

#include <httplib.h>

#include <json.hpp>

#include "tutorforge/records/wire.hpp"

namespace tutorforge::service {

using nlohmann::json;

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidRequest:
    case ErrorCode::InvalidInputCombination:
    case ErrorCode::StarsOutOfRange:
    case ErrorCode::FollowUpUnsupported:
    case ErrorCode::MissingSlot:
      return 400;
    case ErrorCode::Unauthorized: return 401;
    case ErrorCode::Forbidden: return 403;
    case ErrorCode::UnknownResponse: return 404;
    case ErrorCode::RatingRequired:
    case ErrorCode::AlreadyRated:
      return 409;
    case ErrorCode::InputTooLong:
    case ErrorCode::SlotTooLong:
      return 413;
    case ErrorCode::Throttled: return 429;
    case ErrorCode::ProviderUnreachable:
    case ErrorCode::ProviderRefused:
    case ErrorCode::StreamAborted:
    case ErrorCode::MalformedProviderResponse:
    case ErrorCode::UnknownPrompt:
      return 502;
    default: return 500;
  }
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const Error& e) {
  send_json(res, http_status(e.code()), {{"error", to_string(e.code())}, {"message", e.what()}});
  if (const auto* t = dynamic_cast<const ThrottledError*>(&e)) {
    res.set_header("Retry-After", std::to_string(t->retry_after_seconds()));
  }
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::parse_error&) {
    throw Error(ErrorCode::InvalidRequest, "request body is not valid JSON");
  }
}

json doc_json(const scaffold::FunctionDoc& d) {
  return {{"name", d.name},
          {"summary", d.summary},
          {"description", d.description},
          {"example_code", d.example_code},
          {"similar_functions", d.similar_functions}};
}

}  // namespace

HttpServer::HttpServer(Tutor& tutor, Credentials credentials)
    : tutor_(tutor), credentials_(std::move(credentials)), server_(std::make_unique<httplib::Server>()) {
  routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::IoError, "cannot bind " + host);
    return bound;
  }
  if (!server_->bind_to_port(host, port)) {
    throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

bool HttpServer::run() { return server_->listen_after_bind(); }

void HttpServer::stop() {
  if (server_) server_->stop();
}

void HttpServer::routes() {
  // Every handler authenticates first and maps service errors to statuses.
  const auto guarded = [this](auto body) {
    return [this, body](const httplib::Request& req, httplib::Response& res) {
      try {
        const auto who = credentials_.authenticate_header(req.get_header_value("Authorization"));
        body(who, req, res);
      } catch (const Error& e) {
        send_error(res, e);
      } catch (const std::exception& e) {
        send_json(res, 500, {{"error", "InternalError"}, {"message", e.what()}});
      }
    };
  };

  const auto start_stream = [this](httplib::Response& res, PendingQuery pending) {
    auto shared = std::make_shared<PendingQuery>(std::move(pending));
    res.set_header("Cache-Control", "no-cache");
    res.set_header("X-Response-Id", shared->response_id());
    res.set_chunked_content_provider(
        "text/event-stream",
        [this, shared](size_t, httplib::DataSink& sink) {
          bool open = true;
          try {
            tutor_.stream(*shared, [&](const records::WireEvent& e) {
              if (!open) return;
              const auto frame = records::encode_wire(e);
              open = sink.write(frame.data(), frame.size());
            });
          } catch (const std::exception&) {
            // StreamFailed already went out on the wire.
          }
          sink.done();
          return true;
        },
        [this, shared](bool) { tutor_.abandon(*shared); });
  };

  server_->Post("/api/query", guarded([this, start_stream](const Identity& who,
                                                           const httplib::Request& req,
                                                           httplib::Response& res) {
    start_stream(res, tutor_.open_query(who, query_input_from_json(parse_body(req))));
  }));

  server_->Post(R"(/api/query/([^/]+)/followup)",
                guarded([this, start_stream](const Identity& who, const httplib::Request& req,
                                             httplib::Response& res) {
                  const auto body = parse_body(req);
                  if (!body.is_object() || !body.contains("question") ||
                      !body["question"].is_string()) {
                    throw Error(ErrorCode::InvalidRequest, "follow-up needs a question string");
                  }
                  start_stream(res, tutor_.open_followup(who, req.matches[1],
                                                         body["question"].get<std::string>()));
                }));

  server_->Post(R"(/api/response/([^/]+)/rating)",
                guarded([this](const Identity& who, const httplib::Request& req,
                               httplib::Response& res) {
                  const auto body = parse_body(req);
                  if (!body.is_object() || !body.contains("stars") ||
                      !body["stars"].is_number_integer()) {
                    throw Error(ErrorCode::InvalidRequest, "rating needs integer stars");
                  }
                  std::string reason;
                  if (body.contains("reason") && body["reason"].is_string()) {
                    reason = body["reason"].get<std::string>();
                  }
                  tutor_.rate_response(who, req.matches[1], body["stars"].get<int>(), reason);
                  send_json(res, 200, {{"response_id", std::string(req.matches[1])}, {"rated", true}});
                }));

  server_->Get(R"(/api/response/([^/]+))",
               guarded([this](const Identity& who, const httplib::Request& req,
                              httplib::Response& res) {
                 send_json(res, 200, records::to_json(tutor_.response(who, req.matches[1])));
               }));

  server_->Get("/api/admin/stats", guarded([this](const Identity& who, const httplib::Request& req,
                                                  httplib::Response& res) {
                 const auto param = [&](const char* k) -> std::optional<std::string> {
                   if (!req.has_param(k)) return std::nullopt;
                   return req.get_param_value(k);
                 };
                 send_json(res, 200, tutor_.admin_stats(who, param("from"), param("to")));
               }));

  server_->Get(R"(/api/docs/([^/]+))", guarded([this](const Identity&, const httplib::Request& req,
                                                      httplib::Response& res) {
                 const auto* doc = tutor_.function_doc(req.matches[1]);
                 if (!doc) {
                   send_json(res, 404, {{"error", "UnknownFunction"},
                                        {"message", "no documentation for " + std::string(req.matches[1])}});
                   return;
                 }
                 send_json(res, 200, doc_json(*doc));
               }));
}

}  // namespace tutorforge::service
