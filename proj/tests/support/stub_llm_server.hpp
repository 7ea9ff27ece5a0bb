#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace tutorforge::testkit {

/// Minimal OpenAI-style streaming endpoint on 127.0.0.1 for provider tests.
class StubLlmServer {
 public:
  enum class Mode { Deltas, Status, AbortMidStream, Garbage, FinishLength };

  StubLlmServer();
  ~StubLlmServer();
  StubLlmServer(const StubLlmServer&) = delete;
  StubLlmServer& operator=(const StubLlmServer&) = delete;

  void set_deltas(std::vector<std::string> deltas);
  void set_mode(Mode mode, int status = 200, std::string body = {});

  [[nodiscard]] std::string endpoint() const;  // "http://127.0.0.1:<port>/v1"
  [[nodiscard]] std::string last_body() const;
  [[nodiscard]] std::string last_path() const;
  [[nodiscard]] std::string last_authorization() const;
  [[nodiscard]] int requests() const;

 private:
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mutex_;
  std::vector<std::string> deltas_;
  Mode mode_ = Mode::Deltas;
  int status_ = 200;
  std::string status_body_;
  std::string last_body_;
  std::string last_path_;
  std::string last_authorization_;
  int requests_ = 0;
};

}  // namespace tutorforge::testkit
