#pragma once

#include <memory>
#include <string>

#include "tutorforge/core/error.hpp"
#include "tutorforge/service/auth.hpp"
#include "tutorforge/service/tutor.hpp"

namespace httplib {
class Server;
}

namespace tutorforge::service {

/// HTTP status used for a service error.
int http_status(ErrorCode code) noexcept;

/// JSON + server-sent-events front end of a Tutor.
///
///   POST /api/query                    body: QueryInput JSON -> event stream
///   POST /api/query/{id}/followup      body: {"question"}    -> event stream
///   POST /api/response/{id}/rating     body: {"stars", "reason"?}
///   GET  /api/response/{id}            stored document
///   GET  /api/admin/stats?from=&to=    admin only
///   GET  /api/docs/{function}
///
/// Requests carry "Authorization: Bearer <token>". Errors answer
/// {"error": code name, "message": text}; Throttled adds Retry-After.
class HttpServer {
 public:
  HttpServer(Tutor& tutor, Credentials credentials);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop(); returns false when the listener failed.
  bool run();
  void stop();

 private:
  void routes();

  Tutor& tutor_;
  Credentials credentials_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace tutorforge::service
