#include "tutorforge/service/tutor.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "tutorforge/analytics/dataset.hpp"
#include "tutorforge/analytics/quality.hpp"
#include "tutorforge/analytics/stats.hpp"
#include "tutorforge/core/error.hpp"
#include "tutorforge/core/text.hpp"
#include "tutorforge/service/retry.hpp"

namespace tutorforge::service {

using nlohmann::json;

namespace {

bool present(const std::optional<std::string>& s) {
  return s && !text::trim(*s).empty();
}

[[noreturn]] void bad_input(FeatureKind feature, const std::string& why) {
  throw Error(ErrorCode::InvalidInputCombination,
              std::string(display_name(feature)) + " " + why);
}

enum class Need { Required, Optional, Forbidden };

struct Matrix {
  Need question, code, intent, parent, subkind;
};

Matrix matrix_for(FeatureKind f) {
  using N = Need;
  switch (f) {
    case FeatureKind::GeneralQuestion: return {N::Required, N::Forbidden, N::Forbidden, N::Forbidden, N::Forbidden};
    case FeatureKind::QuestionFromCode: return {N::Required, N::Required, N::Forbidden, N::Forbidden, N::Forbidden};
    case FeatureKind::ExplainCode: return {N::Forbidden, N::Required, N::Forbidden, N::Forbidden, N::Forbidden};
    case FeatureKind::HelpFixCode: return {N::Forbidden, N::Required, N::Required, N::Forbidden, N::Forbidden};
    case FeatureKind::HelpWriteCode: return {N::Required, N::Forbidden, N::Forbidden, N::Forbidden, N::Forbidden};
    case FeatureKind::FollowUp: return {N::Required, N::Forbidden, N::Forbidden, N::Required, N::Forbidden};
    case FeatureKind::InlineExploration: return {N::Required, N::Forbidden, N::Forbidden, N::Optional, N::Required};
  }
  return {};
}

void check_field(FeatureKind f, Need need, bool given, const char* what) {
  if (need == Need::Required && !given) bad_input(f, std::string("requires ") + what);
  if (need == Need::Forbidden && given) bad_input(f, std::string("does not take ") + what);
}

std::optional<std::string> read_text(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  if (!j[key].is_string()) {
    throw Error(ErrorCode::InvalidRequest, std::string("field '") + key + "' must be a string");
  }
  return j[key].get<std::string>();
}

std::optional<std::string> normalized(std::optional<std::string> s) {
  if (!present(s)) return std::nullopt;
  return s;
}

std::size_t id_number(const std::string& id) {
  const auto dash = id.rfind('-');
  if (dash == std::string::npos) return 0;
  try {
    return std::stoul(id.substr(dash + 1));
  } catch (const std::exception&) {
    return 0;
  }
}

}  // namespace

void check_input(const QueryInput& in, const prompts::InputLimits& limits) {
  const auto m = matrix_for(in.feature);
  check_field(in.feature, m.question, present(in.question), "a question");
  check_field(in.feature, m.code, present(in.code), "code");
  check_field(in.feature, m.intent, present(in.intended_behavior), "an intended behavior");
  check_field(in.feature, m.parent, present(in.parent_response), "a parent response");
  check_field(in.feature, m.subkind, in.subkind.has_value(), "an exploration kind");
  const auto too_long = [&](const std::optional<std::string>& s, const char* what) {
    if (present(s) && s->size() > limits.question_chars) {
      throw Error(ErrorCode::InputTooLong, fmt::format("{} has {} characters; the limit is {}",
                                                       what, s->size(), limits.question_chars));
    }
  };
  too_long(in.question, "question");
  too_long(in.intended_behavior, "intended behavior");
  if (present(in.code)) {
    const auto lines = text::split_lines(*in.code).size();
    if (lines > limits.code_lines) {
      throw Error(ErrorCode::InputTooLong,
                  fmt::format("code has {} lines; the limit is {}", lines, limits.code_lines));
    }
  }
}

QueryInput query_input_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidRequest, "query must be a JSON object");
  QueryInput in;
  const auto feature = read_text(j, "feature");
  if (!feature) throw Error(ErrorCode::InvalidRequest, "query needs a feature");
  const auto kind = parse_feature(*feature);
  if (!kind) throw Error(ErrorCode::InvalidRequest, "unknown feature '" + *feature + "'");
  in.feature = *kind;
  if (const auto sub = read_text(j, "subkind")) {
    in.subkind = parse_inline_subkind(*sub);
    if (!in.subkind) throw Error(ErrorCode::InvalidRequest, "unknown subkind '" + *sub + "'");
  }
  in.question = read_text(j, "question");
  in.code = read_text(j, "code");
  in.intended_behavior = read_text(j, "intended_behavior");
  in.parent_response = read_text(j, "parent_response");
  return in;
}

struct Tutor::Session {
  Session(Identity id, const ThrottleSettings& t, Timestamp now)
      : who(std::move(id)), bucket(t.capacity, t.refill_per_hour, now) {}
  std::mutex mutex;
  Identity who;
  std::optional<std::string> pending;
  bool in_flight = false;
  TokenBucket bucket;
};

Tutor::Tutor(TutorDeps deps, TutorOptions options)
    : deps_(std::move(deps)), options_(std::move(options)) {
  if (!deps_.library || !deps_.provider || !deps_.docs) {
    throw Error(ErrorCode::ConfigError, "tutor needs prompts, a provider and a doc store");
  }
  if (!deps_.clock) deps_.clock = system_now;
  provider_ = std::make_shared<RetryingProvider>(deps_.provider);
  if (!deps_.log.empty()) {
    std::size_t highest = 0;
    for (auto& r : records::load_log(deps_.log)) {
      highest = std::max({highest, id_number(r.response.id), id_number(r.query.id)});
      const auto id = r.response.id;
      order_.push_back(id);
      responses_[id] = {"", std::move(r)};
    }
    serial_ = highest;
    log_.emplace(deps_.log);
  }
}

Tutor::~Tutor() = default;

Tutor::Session& Tutor::session(const Identity& who) {
  std::lock_guard lock(sessions_mutex_);
  auto& slot = sessions_[who.session];
  if (!slot) slot = std::make_unique<Session>(who, options_.throttle, deps_.clock());
  return *slot;
}

std::string Tutor::next_id(const char* prefix) {
  return fmt::format("{}-{:06d}", prefix, ++serial_);
}

PendingQuery Tutor::admit(const Identity& who, records::Query query,
                          std::optional<std::string> prior_exchange) {
  auto& s = session(who);
  std::lock_guard lock(s.mutex);
  if (s.pending) {
    throw Error(ErrorCode::RatingRequired, "rate response " + *s.pending + " first");
  }
  if (s.in_flight) {
    throw Error(ErrorCode::RatingRequired, "the previous response is still streaming");
  }
  if (who.role != Role::Admin) {
    const auto decision = s.bucket.try_take(deps_.clock());
    if (!decision.allowed) throw ThrottledError(decision.retry_after_seconds);
  }
  s.in_flight = true;
  const auto n = ++serial_;
  PendingQuery p;
  p.session_ = who.session;
  p.query_ = std::move(query);
  p.query_.id = fmt::format("q-{:06d}", n);
  p.query_.user = who.user;
  p.query_.created_at = deps_.clock();
  p.query_.version = options_.version;
  p.response_id_ = fmt::format("r-{:06d}", n);
  p.prior_exchange_ = std::move(prior_exchange);
  p.active_ = true;
  return p;
}

PendingQuery Tutor::open_query(const Identity& who, QueryInput input) {
  input.question = normalized(std::move(input.question));
  input.code = normalized(std::move(input.code));
  input.intended_behavior = normalized(std::move(input.intended_behavior));
  input.parent_response = normalized(std::move(input.parent_response));
  check_input(input, deps_.library->limits());

  std::optional<std::string> prior;
  if (input.parent_response) {
    std::lock_guard lock(data_mutex_);
    const auto it = responses_.find(*input.parent_response);
    if (it == responses_.end() || it->second.record.query.user != who.user) {
      throw Error(ErrorCode::UnknownResponse, "no response " + *input.parent_response);
    }
    const auto& parent = it->second.record;
    if (input.feature == FeatureKind::FollowUp && !supports_followup(parent.query.feature)) {
      throw Error(ErrorCode::FollowUpUnsupported,
                  std::string(display_name(parent.query.feature)) + " responses take no follow-ups");
    }
    prior = exchange_text(parent.query, parent.response);
  }

  records::Query q;
  q.feature = input.feature;
  q.subkind = input.subkind;
  q.question = input.question;
  q.code = input.code;
  q.intended_behavior = input.intended_behavior;
  q.parent_response = input.parent_response;
  return admit(who, std::move(q), std::move(prior));
}

PendingQuery Tutor::open_followup(const Identity& who, const std::string& parent_id,
                                  std::string question) {
  QueryInput in;
  in.feature = FeatureKind::FollowUp;
  in.question = std::move(question);
  in.parent_response = parent_id;
  // An unknown parent is reported before a missing question.
  {
    std::lock_guard lock(data_mutex_);
    const auto it = responses_.find(parent_id);
    if (it == responses_.end() || it->second.record.query.user != who.user) {
      throw Error(ErrorCode::UnknownResponse, "no response " + parent_id);
    }
  }
  return open_query(who, std::move(in));
}

void Tutor::abandon(PendingQuery& pending) noexcept {
  if (!pending.active_) return;
  pending.active_ = false;
  std::lock_guard lock(sessions_mutex_);
  const auto it = sessions_.find(pending.session_);
  if (it == sessions_.end()) return;
  std::lock_guard session_lock(it->second->mutex);
  it->second->in_flight = false;
}

records::ResponseDocument Tutor::stream(PendingQuery& pending, const WireSink& sink) {
  if (!pending.active_) throw Error(ErrorCode::InvalidRequest, "query was already streamed");
  const auto fail = [&](const std::string& code, const std::string& message) {
    if (sink) sink(records::StreamFailed{code, message});
    abandon(pending);
  };
  records::ResponseDocument doc;
  try {
    const GenerationContext ctx{*deps_.library, *provider_, *deps_.docs, options_.max_output_tokens};
    doc = generate_response(ctx, pending.query_, pending.response_id_, pending.prior_exchange_, sink);
    doc.validate();
  } catch (const Error& e) {
    fail(std::string(to_string(e.code())), e.what());
    throw;
  } catch (const std::exception& e) {
    fail("InternalError", e.what());
    throw;
  }

  records::UsageRecord record{pending.query_, doc, std::nullopt, {}};
  try {
    if (log_) log_->append_usage(record);
  } catch (const Error& e) {
    fail(std::string(to_string(e.code())), e.what());
    throw;
  }
  {
    std::lock_guard lock(data_mutex_);
    order_.push_back(doc.id);
    responses_[doc.id] = {pending.session_, std::move(record)};
  }
  {
    auto& s = session({pending.session_, pending.query_.user, Role::Student});
    std::lock_guard lock(s.mutex);
    s.pending = doc.id;
    s.in_flight = false;
  }
  pending.active_ = false;
  if (sink) sink(records::ResponseCompleted{doc.id, doc.finish});
  return doc;
}

records::ResponseDocument Tutor::submit_query(const Identity& who, QueryInput input,
                                              const WireSink& sink) {
  auto pending = open_query(who, std::move(input));
  return stream(pending, sink);
}

records::ResponseDocument Tutor::submit_followup(const Identity& who, const std::string& parent_id,
                                                 std::string question, const WireSink& sink) {
  auto pending = open_followup(who, parent_id, std::move(question));
  return stream(pending, sink);
}

void Tutor::rate_response(const Identity& who, const std::string& response_id, int stars,
                          std::string reason) {
  auto& s = session(who);
  std::lock_guard session_lock(s.mutex);
  std::lock_guard lock(data_mutex_);
  const auto it = responses_.find(response_id);
  if (it == responses_.end() || it->second.record.query.user != who.user) {
    throw Error(ErrorCode::UnknownResponse, "no response " + response_id);
  }
  if (stars < 1 || stars > 5) {
    throw Error(ErrorCode::StarsOutOfRange, "stars must be 1 to 5, got " + std::to_string(stars));
  }
  auto& record = it->second.record;
  if (record.rating) throw Error(ErrorCode::AlreadyRated, response_id + " is already rated");
  const records::Rating rating{stars, std::move(reason), deps_.clock()};
  if (log_) log_->append_rating(response_id, rating);
  record.rating = rating;
  if (s.pending == response_id) s.pending.reset();
}

ThrottleDecision Tutor::throttle_check(const Identity& who) {
  if (who.role == Role::Admin) return {};
  auto& s = session(who);
  std::lock_guard lock(s.mutex);
  return s.bucket.check(deps_.clock());
}

std::optional<std::string> Tutor::pending_rating(const Identity& who) {
  auto& s = session(who);
  std::lock_guard lock(s.mutex);
  return s.pending;
}

std::optional<records::UsageRecord> Tutor::record(const std::string& response_id) const {
  std::lock_guard lock(data_mutex_);
  const auto it = responses_.find(response_id);
  if (it == responses_.end()) return std::nullopt;
  return it->second.record;
}

records::ResponseDocument Tutor::response(const Identity& who,
                                          const std::string& response_id) const {
  std::lock_guard lock(data_mutex_);
  const auto it = responses_.find(response_id);
  if (it == responses_.end() ||
      (who.role != Role::Admin && it->second.record.query.user != who.user)) {
    throw Error(ErrorCode::UnknownResponse, "no response " + response_id);
  }
  return it->second.record.response;
}

std::vector<records::UsageRecord> Tutor::records() const {
  std::lock_guard lock(data_mutex_);
  std::vector<records::UsageRecord> out;
  out.reserve(order_.size());
  for (const auto& id : order_) out.push_back(responses_.at(id).record);
  return out;
}

json Tutor::admin_stats(const Identity& who, const std::optional<std::string>& from,
                        const std::optional<std::string>& to) const {
  if (who.role != Role::Admin) throw Error(ErrorCode::Forbidden, "statistics are for admins");
  const auto day = [](const std::optional<std::string>& d) -> std::optional<long> {
    if (!d || d->empty()) return std::nullopt;
    try {
      return days_from_date(*d);
    } catch (const Error&) {
      throw Error(ErrorCode::InvalidRequest, "dates must look like 2024-01-31, got '" + *d + "'");
    }
  };
  const auto lo = day(from);
  const auto hi = day(to);
  std::vector<records::UsageRecord> selected;
  std::set<std::string> versions;
  for (auto& r : records()) {
    const auto d = days_from_date(local_date(r.query.created_at, options_.utc_offset_minutes));
    if ((lo && d < *lo) || (hi && d > *hi)) continue;
    versions.insert(r.query.version);
    selected.push_back(std::move(r));
  }
  const auto anon = analytics::anonymized(
      selected, {analytics::Redaction::Pseudonymize, options_.pseudonym_salt});
  const auto stats = analytics::feature_usage_stats(
      anon, {options_.smoothing_window, options_.utc_offset_minutes});
  json out{{"usage", analytics::to_json(stats)},
           {"table", analytics::render_usage_table(
                         stats, std::vector<std::string>(versions.begin(), versions.end()))},
           {"quality", nullptr}};
  try {
    out["quality"] = analytics::to_json(analytics::quality_rates(anon));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DenominatorZero) throw;
  }
  return out;
}

const scaffold::FunctionDoc* Tutor::function_doc(const std::string& name) const {
  return deps_.docs->find(name);
}

}  // namespace tutorforge::service
