#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tutorforge/core/time.hpp"
#include "tutorforge/records/usage.hpp"
#include "tutorforge/service/auth.hpp"
#include "tutorforge/service/config.hpp"
#include "tutorforge/service/responder.hpp"
#include "tutorforge/service/throttle.hpp"

namespace tutorforge::service {

/// What a student submits. Absent and empty strings are the same.
struct QueryInput {
  FeatureKind feature = FeatureKind::GeneralQuestion;
  std::optional<InlineSubKind> subkind;
  std::optional<std::string> question;
  std::optional<std::string> code;
  std::optional<std::string> intended_behavior;
  std::optional<std::string> parent_response;
};

/// Input matrix per feature, plus length limits.
/// Errors: InvalidInputCombination, InputTooLong.
void check_input(const QueryInput& input, const prompts::InputLimits& limits);

QueryInput query_input_from_json(const nlohmann::json& j);

struct TutorOptions {
  ThrottleSettings throttle;
  std::optional<int> max_output_tokens = 1024;
  std::string version = "v2";
  int utc_offset_minutes = 0;
  std::size_t smoothing_window = 7;
  std::string pseudonym_salt;
};

struct TutorDeps {
  std::shared_ptr<const prompts::PromptLibrary> library;
  std::shared_ptr<const gateway::Provider> provider;  // wrapped in a RetryingProvider
  std::shared_ptr<const scaffold::DocStore> docs;
  std::filesystem::path log;  // empty keeps records in memory only
  Clock clock;                 // defaults to the system clock
};

/// A query that passed every check and holds its session's in-flight slot
/// until streamed or abandoned.
class PendingQuery {
 public:
  PendingQuery() = default;
  [[nodiscard]] const records::Query& query() const noexcept { return query_; }
  [[nodiscard]] const std::string& response_id() const noexcept { return response_id_; }
  [[nodiscard]] bool active() const noexcept { return active_; }

 private:
  friend class Tutor;
  std::string session_;
  records::Query query_;
  std::string response_id_;
  std::optional<std::string> prior_exchange_;
  bool active_ = false;
};

/// Tutor service core: sessions, the rating gate, throttling, feature
/// dispatch, persistence and admin statistics. Thread-safe; operations of one
/// session are serialized.
class Tutor {
 public:
  Tutor(TutorDeps deps, TutorOptions options);
  ~Tutor();
  Tutor(const Tutor&) = delete;
  Tutor& operator=(const Tutor&) = delete;

  /// Checks a new query. Errors: RatingRequired, InvalidInputCombination,
  /// InputTooLong, Throttled (retry seconds in the message and via
  /// throttle_check), UnknownResponse and FollowUpUnsupported for follow-ups.
  PendingQuery open_query(const Identity& who, QueryInput input);
  PendingQuery open_followup(const Identity& who, const std::string& parent_id,
                             std::string question);

  /// Streams the response and, once complete, persists the usage record and
  /// marks the response as awaiting its rating. A failure sends StreamFailed,
  /// persists nothing, releases the slot and rethrows.
  records::ResponseDocument stream(PendingQuery& pending, const WireSink& sink = {});
  /// Releases the slot of a query that will not be streamed.
  void abandon(PendingQuery& pending) noexcept;

  records::ResponseDocument submit_query(const Identity& who, QueryInput input,
                                         const WireSink& sink = {});
  records::ResponseDocument submit_followup(const Identity& who, const std::string& parent_id,
                                            std::string question, const WireSink& sink = {});

  /// Errors: UnknownResponse, AlreadyRated, StarsOutOfRange.
  void rate_response(const Identity& who, const std::string& response_id, int stars,
                     std::string reason = {});

  [[nodiscard]] ThrottleDecision throttle_check(const Identity& who);
  [[nodiscard]] std::optional<std::string> pending_rating(const Identity& who);

  /// The stored document; owners and admins only. Errors: UnknownResponse.
  [[nodiscard]] records::ResponseDocument response(const Identity& who,
                                                   const std::string& response_id) const;
  [[nodiscard]] std::optional<records::UsageRecord> record(const std::string& response_id) const;

  /// Usage statistics over pseudonymized records, optionally limited to local
  /// dates [from, to]. Errors: Forbidden.
  [[nodiscard]] nlohmann::json admin_stats(const Identity& who,
                                           const std::optional<std::string>& from = {},
                                           const std::optional<std::string>& to = {}) const;

  [[nodiscard]] const scaffold::FunctionDoc* function_doc(const std::string& name) const;
  [[nodiscard]] std::vector<records::UsageRecord> records() const;
  [[nodiscard]] const TutorOptions& options() const noexcept { return options_; }

 private:
  struct Session;
  struct Stored {
    std::string session;
    records::UsageRecord record;
  };

  Session& session(const Identity& who);
  PendingQuery admit(const Identity& who, records::Query query,
                     std::optional<std::string> prior_exchange);
  std::string next_id(const char* prefix);

  TutorDeps deps_;
  TutorOptions options_;
  std::shared_ptr<const gateway::Provider> provider_;
  std::optional<records::RecordLog> log_;

  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::unique_ptr<Session>> sessions_;

  mutable std::mutex data_mutex_;
  std::map<std::string, Stored> responses_;  // by response id
  std::vector<std::string> order_;           // response ids in completion order
  std::atomic<std::size_t> serial_{0};
};

}  // namespace tutorforge::service
