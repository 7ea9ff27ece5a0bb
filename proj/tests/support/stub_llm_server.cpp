#include "stub_llm_server.hpp"

#include <httplib.h>

#include <json.hpp>

namespace tutorforge::testkit {

namespace {

std::string delta_event(const std::string& path, const std::string& text,
                        const char* finish = nullptr) {
  nlohmann::json choice;
  if (path.find("chat") != std::string::npos) {
    choice["delta"] = {{"content", text}};
  } else {
    choice["text"] = text;
  }
  choice["finish_reason"] = finish ? nlohmann::json(finish) : nlohmann::json();
  return "data: " + nlohmann::json{{"choices", nlohmann::json::array({choice})}}.dump() + "\n\n";
}

}  // namespace

StubLlmServer::StubLlmServer() : server_(std::make_unique<httplib::Server>()) {
  const auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    std::vector<std::string> deltas;
    Mode mode;
    {
      std::lock_guard lock(mutex_);
      ++requests_;
      last_body_ = req.body;
      last_path_ = req.path;
      last_authorization_ = req.get_header_value("Authorization");
      deltas = deltas_;
      mode = mode_;
      if (mode == Mode::Status) {
        res.status = status_;
        res.set_content(status_body_, "application/json");
        return;
      }
    }
    const auto path = req.path;
    res.set_chunked_content_provider(
        "text/event-stream", [deltas, mode, path](size_t, httplib::DataSink& sink) {
          if (mode == Mode::Garbage) {
            const std::string bad = "data: {not json\n\n";
            sink.write(bad.data(), bad.size());
            sink.done();
            return true;
          }
          for (std::size_t i = 0; i < deltas.size(); ++i) {
            const bool last = i + 1 == deltas.size();
            const auto frame = delta_event(
                path, deltas[i], last && mode == Mode::FinishLength ? "length" : nullptr);
            sink.write(frame.data(), frame.size());
            if (mode == Mode::AbortMidStream) return false;  // drop the connection
          }
          const std::string done = "data: [DONE]\n\n";
          sink.write(done.data(), done.size());
          sink.done();
          return true;
        });
  };
  server_->Post("/v1/chat/completions", handler);
  server_->Post("/v1/completions", handler);
  port_ = server_->bind_to_any_port("127.0.0.1");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

StubLlmServer::~StubLlmServer() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

void StubLlmServer::set_deltas(std::vector<std::string> deltas) {
  std::lock_guard lock(mutex_);
  deltas_ = std::move(deltas);
}

void StubLlmServer::set_mode(Mode mode, int status, std::string body) {
  std::lock_guard lock(mutex_);
  mode_ = mode;
  status_ = status;
  status_body_ = std::move(body);
}

std::string StubLlmServer::endpoint() const {
  return "http://127.0.0.1:" + std::to_string(port_) + "/v1";
}

std::string StubLlmServer::last_body() const {
  std::lock_guard lock(mutex_);
  return last_body_;
}
std::string StubLlmServer::last_path() const {
  std::lock_guard lock(mutex_);
  return last_path_;
}
std::string StubLlmServer::last_authorization() const {
  std::lock_guard lock(mutex_);
  return last_authorization_;
}
int StubLlmServer::requests() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

}  // namespace tutorforge::testkit
