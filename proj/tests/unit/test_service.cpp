#include <gtest/gtest.h>

#include <httplib.h>

#include <fstream>
#include <random>
#include <set>
#include <thread>

#include "fixtures.hpp"
#include "tutorforge/core/error.hpp"
#include "tutorforge/gateway/scripted.hpp"
#include "tutorforge/records/wire.hpp"
#include "tutorforge/scaffold/docstore.hpp"
#include "tutorforge/service/auth.hpp"
#include "tutorforge/service/config.hpp"
#include "tutorforge/service/http_server.hpp"
#include "tutorforge/service/retry.hpp"
#include "tutorforge/service/throttle.hpp"
#include "tutorforge/service/tutor.hpp"
#include "universal_provider.hpp"

using namespace tutorforge;
using namespace tutorforge::service;
using nlohmann::json;
using namespace std::chrono_literals;

namespace {

const Timestamp kStart = parse_timestamp("2024-03-04T09:00:00Z");

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::IoError;
}

std::shared_ptr<const prompts::PromptLibrary> library() {
  static const auto lib =
      std::make_shared<const prompts::PromptLibrary>(prompts::PromptLibrary::load(testkit::repo_data("prompts")));
  return lib;
}

std::shared_ptr<const scaffold::DocStore> docs() {
  static const auto store =
      std::make_shared<const scaffold::DocStore>(scaffold::build_docstore(testkit::repo_data("docs/corpus")));
  return store;
}

QueryInput gq(std::string question = "How do I add up numbers in a loop?") {
  QueryInput in;
  in.feature = FeatureKind::GeneralQuestion;
  in.question = std::move(question);
  return in;
}

QueryInput hfc() {
  QueryInput in;
  in.feature = FeatureKind::HelpFixCode;
  in.code = "int total;\nfor (int i = 0; i < n; i++)\n    total += i;\nprintf(\"%d\", total);";
  in.intended_behavior = "Print the sum of 0 to n-1.";
  return in;
}

/// One valid input per feature; follow-ups need a parent and are built apart.
std::vector<QueryInput> one_of_each() {
  std::vector<QueryInput> out;
  out.push_back(gq());
  QueryInput qfc;
  qfc.feature = FeatureKind::QuestionFromCode;
  qfc.question = "Why is the total wrong?";
  qfc.code = "int total;\ntotal += 1;";
  out.push_back(qfc);
  QueryInput ec;
  ec.feature = FeatureKind::ExplainCode;
  ec.code = "int total = 0;\nfor (int i = 0; i < n; i++)\n    total += i;";
  out.push_back(ec);
  out.push_back(hfc());
  QueryInput hwc;
  hwc.feature = FeatureKind::HelpWriteCode;
  hwc.question = "Write a loop that sums the numbers below n.";
  out.push_back(hwc);
  for (const auto sub : {InlineSubKind::ExampleCode, InlineSubKind::Documentation,
                         InlineSubKind::AskQuestion}) {
    QueryInput in;
    in.feature = FeatureKind::InlineExploration;
    in.subkind = sub;
    in.question = "for";
    out.push_back(in);
  }
  return out;
}

struct Rig {
  explicit Rig(std::shared_ptr<testkit::UniversalProvider> p = std::make_shared<testkit::UniversalProvider>(),
               std::filesystem::path log = {}, TutorOptions options = {})
      : provider(std::move(p)), now(std::make_shared<Timestamp>(kStart)) {
    auto clock = now;
    tutor = std::make_unique<Tutor>(
        TutorDeps{library(), provider, docs(), std::move(log), [clock] { return *clock; }},
        std::move(options));
  }
  void advance(std::chrono::seconds s) { *now += s; }

  std::shared_ptr<testkit::UniversalProvider> provider;
  std::shared_ptr<Timestamp> now;
  std::unique_ptr<Tutor> tutor;
};

const Identity kAlice{"tok-alice", "alice", Role::Student};
const Identity kBob{"tok-bob", "bob", Role::Student};
const Identity kAdmin{"tok-admin", "root", Role::Admin};

}  // namespace

// ---------------------------------------------------------------- input matrix

TEST(InputMatrix, EveryCombinationAgainstTable) {
  // 'R' required, 'O' optional, '-' forbidden: question, code, intent, parent, subkind.
  const std::map<FeatureKind, std::string> table = {
      {FeatureKind::GeneralQuestion, "R----"},  {FeatureKind::QuestionFromCode, "RR---"},
      {FeatureKind::ExplainCode, "-R---"},      {FeatureKind::HelpFixCode, "-RR--"},
      {FeatureKind::HelpWriteCode, "R----"},    {FeatureKind::FollowUp, "R--R-"},
      {FeatureKind::InlineExploration, "R--OR"},
  };
  for (const auto& [feature, row] : table) {
    for (int mask = 0; mask < 32; ++mask) {
      QueryInput in;
      in.feature = feature;
      if (mask & 1) in.question = "q";
      if (mask & 2) in.code = "int x;";
      if (mask & 4) in.intended_behavior = "works";
      if (mask & 8) in.parent_response = "r-000001";
      if (mask & 16) in.subkind = InlineSubKind::ExampleCode;
      bool ok = true;
      for (int k = 0; k < 5; ++k) {
        const bool given = mask & (1 << k);
        if (row[k] == 'R' && !given) ok = false;
        if (row[k] == '-' && given) ok = false;
      }
      if (ok) {
        EXPECT_NO_THROW(check_input(in, {})) << to_string(feature) << " mask " << mask;
      } else {
        EXPECT_EQ(code_of([&] { check_input(in, {}); }), ErrorCode::InvalidInputCombination)
            << to_string(feature) << " mask " << mask;
      }
    }
  }
}

TEST(InputMatrix, BlankCountsAsAbsent) {
  auto in = gq();
  in.code = "  \n ";
  EXPECT_NO_THROW(check_input(in, {}));
  in.question = "   ";
  EXPECT_EQ(code_of([&] { check_input(in, {}); }), ErrorCode::InvalidInputCombination);
}

TEST(InputMatrix, LengthLimits) {
  const prompts::InputLimits limits{10, 2};
  EXPECT_NO_THROW(check_input(gq("0123456789"), limits));
  EXPECT_EQ(code_of([&] { check_input(gq("0123456789a"), limits); }), ErrorCode::InputTooLong);
  QueryInput ec;
  ec.feature = FeatureKind::ExplainCode;
  ec.code = "a;\nb;";
  EXPECT_NO_THROW(check_input(ec, limits));
  ec.code = "a;\nb;\nc;";
  EXPECT_EQ(code_of([&] { check_input(ec, limits); }), ErrorCode::InputTooLong);
  auto fix = hfc();
  fix.code = "x;";
  fix.intended_behavior = std::string(11, 'i');
  EXPECT_EQ(code_of([&] { check_input(fix, limits); }), ErrorCode::InputTooLong);
}

TEST(InputMatrix, FromJson) {
  const auto in = query_input_from_json(
      json::parse(R"({"feature":"inline-exploration","subkind":"documentation","question":"printf"})"));
  EXPECT_EQ(in.feature, FeatureKind::InlineExploration);
  EXPECT_EQ(in.subkind, InlineSubKind::Documentation);
  EXPECT_EQ(code_of([] { query_input_from_json(json::parse(R"({"feature":"nope"})")); }),
            ErrorCode::InvalidRequest);
  EXPECT_EQ(code_of([] { query_input_from_json(json::parse(R"({"question":"x"})")); }),
            ErrorCode::InvalidRequest);
  EXPECT_EQ(code_of([] { query_input_from_json(json::parse(R"({"feature":"general-question","question":3})")); }),
            ErrorCode::InvalidRequest);
}

// ---------------------------------------------------------------- throttle

TEST(Throttle, BurstThenRefill) {
  TokenBucket bucket(10, 10, kStart);
  for (int i = 0; i < 10; ++i) EXPECT_TRUE(bucket.try_take(kStart).allowed) << i;
  const auto denied = bucket.try_take(kStart);
  EXPECT_FALSE(denied.allowed);
  EXPECT_EQ(denied.retry_after_seconds, 360);
  EXPECT_FALSE(bucket.try_take(kStart + 359s).allowed);
  EXPECT_TRUE(bucket.try_take(kStart + 360s).allowed);
  EXPECT_FALSE(bucket.check(kStart + 360s).allowed);
}

TEST(Throttle, NeverExceedsCapacity) {
  TokenBucket bucket(10, 10, kStart);
  EXPECT_DOUBLE_EQ(bucket.tokens(kStart + 100h), 10.0);
}

TEST(Throttle, AdmittedNeverExceedsBudgetProperty) {
  // Over any window [a, b] at most capacity + rate * (b - a) queries pass.
  std::mt19937 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    TokenBucket bucket(10, 10, kStart);
    std::vector<Timestamp> admitted;
    auto t = kStart;
    std::uniform_int_distribution<int> gap(0, 400);
    for (int i = 0; i < 500; ++i) {
      t += std::chrono::seconds(gap(rng));
      if (bucket.try_take(t).allowed) admitted.push_back(t);
    }
    for (std::size_t a = 0; a < admitted.size(); ++a) {
      for (std::size_t b = a; b < admitted.size(); ++b) {
        const double hours = std::chrono::duration<double>(admitted[b] - admitted[a]).count() / 3600.0;
        ASSERT_LE(static_cast<double>(b - a + 1), 10.0 + 10.0 * hours + 1e-9);
      }
    }
  }
}

TEST(Throttle, TutorThrottlesStudentsButNotAdmins) {
  Rig rig;
  for (int i = 0; i < 10; ++i) {
    const auto doc = rig.tutor->submit_query(kAlice, gq());
    rig.tutor->rate_response(kAlice, doc.id, 4);
  }
  try {
    rig.tutor->submit_query(kAlice, gq());
    FAIL() << "expected Throttled";
  } catch (const ThrottledError& e) {
    EXPECT_EQ(e.code(), ErrorCode::Throttled);
    EXPECT_EQ(e.retry_after_seconds(), 360);
  }
  EXPECT_FALSE(rig.tutor->throttle_check(kAlice).allowed);
  rig.advance(6min);
  EXPECT_TRUE(rig.tutor->throttle_check(kAlice).allowed);
  EXPECT_NO_THROW(rig.tutor->submit_query(kAlice, gq()));

  for (int i = 0; i < 15; ++i) {
    const auto doc = rig.tutor->submit_query(kAdmin, gq());
    rig.tutor->rate_response(kAdmin, doc.id, 5);
  }
}

TEST(Throttle, RejectedInputCostsNoToken) {
  Rig rig;
  for (int i = 0; i < 20; ++i) {
    auto bad = gq();
    bad.code = "int x;";
    EXPECT_EQ(code_of([&] { rig.tutor->submit_query(kAlice, bad); }),
              ErrorCode::InvalidInputCombination);
  }
  EXPECT_NEAR(TokenBucket(10, 10, kStart).tokens(kStart), 10, 1e-12);
  EXPECT_TRUE(rig.tutor->throttle_check(kAlice).allowed);
  for (int i = 0; i < 10; ++i) {
    rig.tutor->rate_response(kAlice, rig.tutor->submit_query(kAlice, gq()).id, 3);
  }
}

// ---------------------------------------------------------------- rating gate

TEST(RatingGate, SecondQueryNeedsRating) {
  Rig rig;
  const auto first = rig.tutor->submit_query(kAlice, gq());
  EXPECT_EQ(rig.tutor->pending_rating(kAlice), first.id);
  EXPECT_EQ(code_of([&] { rig.tutor->submit_query(kAlice, gq()); }), ErrorCode::RatingRequired);
  // Another session is independent.
  EXPECT_NO_THROW(rig.tutor->submit_query(kBob, gq()));
  rig.tutor->rate_response(kAlice, first.id, 5, "clear");
  EXPECT_FALSE(rig.tutor->pending_rating(kAlice));
  EXPECT_NO_THROW(rig.tutor->submit_query(kAlice, gq()));
}

TEST(RatingGate, InFlightBlocksSecondQuery) {
  Rig rig;
  auto pending = rig.tutor->open_query(kAlice, gq());
  EXPECT_EQ(code_of([&] { rig.tutor->open_query(kAlice, gq()); }), ErrorCode::RatingRequired);
  rig.tutor->abandon(pending);
  EXPECT_NO_THROW(rig.tutor->open_query(kAlice, gq()));
}

TEST(RatingGate, RatingErrors) {
  Rig rig;
  const auto doc = rig.tutor->submit_query(kAlice, gq());
  EXPECT_EQ(code_of([&] { rig.tutor->rate_response(kAlice, "r-999999", 3); }),
            ErrorCode::UnknownResponse);
  EXPECT_EQ(code_of([&] { rig.tutor->rate_response(kBob, doc.id, 3); }), ErrorCode::UnknownResponse);
  EXPECT_EQ(code_of([&] { rig.tutor->rate_response(kAlice, doc.id, 0); }), ErrorCode::StarsOutOfRange);
  EXPECT_EQ(code_of([&] { rig.tutor->rate_response(kAlice, doc.id, 6); }), ErrorCode::StarsOutOfRange);
  rig.tutor->rate_response(kAlice, doc.id, 1);
  EXPECT_EQ(code_of([&] { rig.tutor->rate_response(kAlice, doc.id, 2); }), ErrorCode::AlreadyRated);
  const auto rec = rig.tutor->record(doc.id);
  ASSERT_TRUE(rec && rec->rating);
  EXPECT_EQ(rec->rating->stars, 1);
  EXPECT_EQ(rec->rating->reason, "");
}

// ---------------------------------------------------------------- follow-ups

TEST(FollowUp, ChainKeepsDirectParent) {
  Rig rig;
  auto parent = rig.tutor->submit_query(kAlice, gq());
  for (int i = 0; i < 3; ++i) {
    rig.tutor->rate_response(kAlice, parent.id, 4);
    const auto child = rig.tutor->submit_followup(kAlice, parent.id, "And what if n is negative?");
    const auto rec = rig.tutor->record(child.id);
    ASSERT_TRUE(rec);
    EXPECT_EQ(rec->query.feature, FeatureKind::FollowUp);
    EXPECT_EQ(rec->query.parent_response, parent.id);
    parent = child;
  }
}

TEST(FollowUp, HelpFixCodeTakesNone) {
  Rig rig;
  const auto fix = rig.tutor->submit_query(kAlice, hfc());
  rig.tutor->rate_response(kAlice, fix.id, 4);
  EXPECT_EQ(code_of([&] { rig.tutor->submit_followup(kAlice, fix.id, "why?"); }),
            ErrorCode::FollowUpUnsupported);
  EXPECT_EQ(code_of([&] { rig.tutor->submit_followup(kAlice, "r-424242", "why?"); }),
            ErrorCode::UnknownResponse);
  // Nothing was admitted, so the session is free.
  EXPECT_NO_THROW(rig.tutor->submit_query(kAlice, gq()));
}

TEST(FollowUp, OtherUsersResponseIsUnknown) {
  Rig rig;
  const auto doc = rig.tutor->submit_query(kAlice, gq());
  EXPECT_EQ(code_of([&] { rig.tutor->submit_followup(kBob, doc.id, "why?"); }),
            ErrorCode::UnknownResponse);
  EXPECT_EQ(code_of([&] { (void)rig.tutor->response(kBob, doc.id); }), ErrorCode::UnknownResponse);
  EXPECT_EQ(rig.tutor->response(kAdmin, doc.id), doc);
}

TEST(FollowUp, SuggestionsOnlyWhereFollowUpsAreAllowed) {
  Rig rig;
  for (const auto& input : one_of_each()) {
    const auto doc = rig.tutor->submit_query(kAlice, input);
    rig.tutor->rate_response(kAlice, doc.id, 3);
    bool has = false;
    for (const auto& s : doc.segments) has |= std::holds_alternative<records::SuggestedFollowUps>(s);
    EXPECT_EQ(has, supports_followup(input.feature)) << to_string(input.feature);
  }
}

// ---------------------------------------------------------------- wire and document

TEST(Wire, ReassembledStreamEqualsStoredDocument) {
  Rig rig;
  auto inputs = one_of_each();
  std::string parent;
  for (std::size_t i = 0; i <= inputs.size(); ++i) {
    std::string body;
    const WireSink sink = [&](const records::WireEvent& e) { body += records::encode_wire(e); };
    records::ResponseDocument doc;
    if (i < inputs.size()) {
      doc = rig.tutor->submit_query(kAlice, inputs[i], sink);
    } else {
      doc = rig.tutor->submit_followup(kAlice, parent, "What about an empty list?", sink);
    }
    if (i == 0) parent = doc.id;
    rig.tutor->rate_response(kAlice, doc.id, 4);
    records::DocumentAssembler assembler;
    assembler.apply_all(records::decode_wire(body));
    EXPECT_TRUE(assembler.completed());
    EXPECT_EQ(assembler.document(), doc) << "input " << i;
    EXPECT_EQ(rig.tutor->response(kAlice, doc.id), doc);
    EXPECT_NO_THROW(doc.validate());
  }
}

TEST(Wire, HiddenCodeNeverReachesTheStudent) {
  Rig rig;
  QueryInput hwc;
  hwc.feature = FeatureKind::HelpWriteCode;
  hwc.question = "Write a loop that sums the numbers below n.";
  std::string body;
  const auto doc = rig.tutor->submit_query(
      kAlice, hwc, [&](const records::WireEvent& e) { body += records::encode_wire(e); });
  EXPECT_EQ(body.find("total += i"), std::string::npos);
  EXPECT_NE(body.find("ProgressLineCount"), std::string::npos);
  bool pseudo = false;
  for (const auto& s : doc.segments) pseudo |= std::holds_alternative<records::PseudoCode>(s);
  EXPECT_TRUE(pseudo);
}

TEST(Wire, OffTopicRefusal) {
  Rig rig(std::make_shared<testkit::UniversalProvider>(0, "// [refusal]:\n// [end]\n"));
  const auto doc = rig.tutor->submit_query(kAlice, gq("What is the best pizza?"));
  EXPECT_EQ(doc.finish, records::Finish::Refused);
  ASSERT_TRUE(doc.text_of(records::kRefusalSection));
  EXPECT_EQ(doc.text_of(records::kRefusalSection)->text, kOffTopicRefusal);
  // Refusals are persisted and still need a rating.
  ASSERT_TRUE(rig.tutor->record(doc.id));
  EXPECT_EQ(rig.tutor->pending_rating(kAlice), doc.id);
}

TEST(Wire, RefusalAfterContentWithholdsIt) {
  Rig rig(std::make_shared<testkit::UniversalProvider>(
      0, "// [answer]: Here is part of it.\n// [refusal]: Not about the course.\n// [end]\n"));
  std::string body;
  const auto doc = rig.tutor->submit_query(
      kAlice, gq(), [&](const records::WireEvent& e) { body += records::encode_wire(e); });
  EXPECT_EQ(doc.finish, records::Finish::Refused);
  EXPECT_EQ(doc.text_of("answer"), nullptr);
  records::DocumentAssembler assembler;
  assembler.apply_all(records::decode_wire(body));
  EXPECT_EQ(assembler.document(), doc);
}

TEST(Wire, WithheldFixQuotesNothingOnTheWire) {
  const std::string fixed = "int total = 0;\nfor (int i = 0; i < n; i++)\n    total += i;\nprintf(\"%d\", total);\n";
  gateway::SequentialProvider provider(
      {{"// [fixed-start]\n" + fixed + "// [fixed-end]\n// [changes]: Start from a known value.\n// [functions]:\n// [end]\n", {}},
       {"// [labels-start]\nL1 /// write int total = 0; here\n// [labels-end]\n// [end]\n", {}}});
  records::Query q;
  q.id = "q-1";
  q.feature = FeatureKind::HelpFixCode;
  q.code = *hfc().code;
  q.intended_behavior = *hfc().intended_behavior;
  std::string body;
  const auto doc = generate_response({*library(), provider, *docs(), std::nullopt}, q, "r-1", std::nullopt,
                                     [&](const records::WireEvent& e) { body += records::encode_wire(e); });
  EXPECT_EQ(doc.finish, records::Finish::Refused);
  EXPECT_NE(body.find("response withheld"), std::string::npos);
  EXPECT_EQ(body.find("total = 0"), std::string::npos);
  EXPECT_EQ(body.find("total=0"), std::string::npos);
}

TEST(Wire, TokenBoundTruncates) {
  TutorOptions options;
  options.max_output_tokens = 5;
  Rig rig(std::make_shared<testkit::UniversalProvider>(), {}, options);
  const auto doc = rig.tutor->submit_query(kAlice, gq());
  EXPECT_EQ(doc.finish, records::Finish::Truncated);
}

TEST(Wire, ProviderFailureSendsStreamFailedAndPersistsNothing) {
  auto provider = std::make_shared<testkit::UniversalProvider>(2);
  Rig rig(provider);
  std::vector<records::WireEvent> events;
  EXPECT_EQ(code_of([&] {
              rig.tutor->submit_query(kAlice, gq(), [&](const records::WireEvent& e) { events.push_back(e); });
            }),
            ErrorCode::ProviderUnreachable);
  ASSERT_FALSE(events.empty());
  ASSERT_TRUE(std::holds_alternative<records::StreamFailed>(events.back()));
  EXPECT_EQ(std::get<records::StreamFailed>(events.back()).error, "ProviderUnreachable");
  EXPECT_TRUE(rig.tutor->records().empty());
  EXPECT_FALSE(rig.tutor->pending_rating(kAlice));
  // Slot released: the next query works.
  EXPECT_NO_THROW(rig.tutor->submit_query(kAlice, gq()));
}

TEST(Wire, SingleProviderFailureIsRetried) {
  auto provider = std::make_shared<testkit::UniversalProvider>(1);
  Rig rig(provider);
  EXPECT_NO_THROW(rig.tutor->submit_query(kAlice, gq()));
}

TEST(Retry, OnlyUnreachableBeforeOutputIsRetried) {
  auto inner = std::make_shared<testkit::UniversalProvider>(1);
  RetryingProvider retrying(inner);
  gateway::CompletionRequest req{"p", {"// [end]"}, std::nullopt, 0.0};
  const auto result = gateway::complete(retrying, req);
  EXPECT_EQ(retrying.retries(), 1u);
  EXPECT_EQ(result.text, std::string(testkit::kUniversalCompletion).substr(
                             0, std::string(testkit::kUniversalCompletion).find("// [end]")));
  inner->fail_next(2);
  EXPECT_THROW(gateway::complete(retrying, req), gateway::ProviderError);
}

// ---------------------------------------------------------------- persistence

TEST(Persistence, EveryCompletedResponseIsLoggedAndReloads) {
  const auto dir = testkit::scratch_dir("service-log");
  const auto log = dir / "usage.jsonl";
  std::vector<std::string> ids;
  {
    Rig rig(std::make_shared<testkit::UniversalProvider>(), log);
    for (const auto& in : one_of_each()) {
      const auto doc = rig.tutor->submit_query(kAlice, in);
      ids.push_back(doc.id);
      rig.tutor->rate_response(kAlice, doc.id, 4, "fine");
    }
    const auto last = rig.tutor->submit_query(kAlice, gq());
    ids.push_back(last.id);  // left unrated on purpose
  }
  Rig again(std::make_shared<testkit::UniversalProvider>(), log);
  const auto recs = again.tutor->records();
  ASSERT_EQ(recs.size(), ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    EXPECT_EQ(recs[i].response.id, ids[i]);
    EXPECT_EQ(recs[i].query.user, "alice");
    EXPECT_EQ(recs[i].rating.has_value(), i + 1 < ids.size());
  }
  // Ids continue after the reloaded ones.
  const auto next = again.tutor->submit_query(kBob, gq());
  EXPECT_GT(next.id, ids.back());
  // The owner can still rate a response from before the restart.
  EXPECT_NO_THROW(again.tutor->rate_response(kAlice, ids.back(), 2));
  const auto reloaded = records::load_log(log);
  const auto it = std::find_if(reloaded.begin(), reloaded.end(),
                               [&](const auto& r) { return r.response.id == ids.back(); });
  ASSERT_NE(it, reloaded.end());
  ASSERT_TRUE(it->rating);
  EXPECT_EQ(it->rating->stars, 2);
}

TEST(Persistence, RefusalsAreLogged) {
  const auto dir = testkit::scratch_dir("service-refusal");
  {
    Rig rig(std::make_shared<testkit::UniversalProvider>(0, "// [refusal]: no.\n// [end]\n"), dir / "u.jsonl");
    rig.tutor->submit_query(kAlice, gq("Tell me a joke"));
  }
  const auto recs = records::load_log(dir / "u.jsonl");
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].response.finish, records::Finish::Refused);
}

// ---------------------------------------------------------------- admin

TEST(Admin, StatsAreAdminOnlyAndPseudonymous) {
  TutorOptions options;
  options.pseudonym_salt = "pepper";
  Rig rig(std::make_shared<testkit::UniversalProvider>(), {}, options);
  for (const auto& who : {kAlice, kBob}) {
    for (const auto& in : one_of_each()) {
      rig.tutor->rate_response(who, rig.tutor->submit_query(who, in).id, 4);
      rig.advance(1h);
    }
  }
  EXPECT_EQ(code_of([&] { (void)rig.tutor->admin_stats(kAlice); }), ErrorCode::Forbidden);
  const auto stats = rig.tutor->admin_stats(kAdmin);
  const auto text = stats.dump();
  EXPECT_EQ(text.find("alice"), std::string::npos);
  EXPECT_EQ(text.find("\"bob\""), std::string::npos);
  EXPECT_TRUE(stats.contains("usage"));
  EXPECT_TRUE(stats["quality"].is_null());  // nothing coded yet
  EXPECT_NE(stats["table"].get<std::string>().find("General Question"), std::string::npos);

  const auto none = rig.tutor->admin_stats(kAdmin, "2030-01-01", "2030-12-31");
  EXPECT_EQ(none.dump().find("\"count\":1"), std::string::npos);
  EXPECT_EQ(code_of([&] { (void)rig.tutor->admin_stats(kAdmin, "yesterday"); }), ErrorCode::InvalidRequest);
}

// ---------------------------------------------------------------- state machine

TEST(StateMachine, RandomOperationsKeepGateAndThrottle) {
  // Reference model: per session, the unrated response and the admitted times.
  std::mt19937 rng(2024);
  Rig rig;
  const std::vector<Identity> people = {
      {"t1", "u1", Role::Student}, {"t2", "u2", Role::Student}, {"t3", "u3", Role::Student},
      {"t4", "u4", Role::Admin}};
  std::map<std::string, std::optional<std::string>> unrated;
  std::map<std::string, std::vector<Timestamp>> admitted;
  std::map<std::string, std::set<std::string>> owned;
  std::size_t ops = 0, accepted = 0, gated = 0, throttled = 0;
  std::uniform_int_distribution<int> op(0, 9), who_pick(0, 3), stars(0, 6), gap(0, 30);
  const auto inputs = one_of_each();
  for (; ops < 10000; ++ops) {
    const auto& who = people[who_pick(rng)];
    const int kind = op(rng);
    if (kind < 4) {
      const auto& in = inputs[rng() % inputs.size()];
      try {
        const auto doc = rig.tutor->submit_query(who, in);
        ASSERT_FALSE(unrated[who.session]) << "gate let a second query through";
        unrated[who.session] = doc.id;
        admitted[who.session].push_back(*rig.now);
        owned[who.user].insert(doc.id);
        ++accepted;
      } catch (const ThrottledError& e) {
        ASSERT_FALSE(unrated[who.session]);
        ASSERT_NE(who.role, Role::Admin);
        ASSERT_GT(e.retry_after_seconds(), 0);
        ++throttled;
      } catch (const Error& e) {
        ASSERT_EQ(e.code(), ErrorCode::RatingRequired);
        ASSERT_TRUE(unrated[who.session]);
        ++gated;
      }
    } else if (kind < 8) {
      // Rate the pending response, a random owned one, or a bogus id.
      std::string id = unrated[who.session].value_or("r-999999");
      if (kind == 7 && !owned[who.user].empty()) id = *owned[who.user].begin();
      const int s = stars(rng);
      const auto rec = rig.tutor->record(id);
      const bool mine = rec && rec->query.user == who.user;
      std::optional<ErrorCode> expected;
      if (!mine) {
        expected = ErrorCode::UnknownResponse;
      } else if (s < 1 || s > 5) {
        expected = ErrorCode::StarsOutOfRange;
      } else if (rec->rating) {
        expected = ErrorCode::AlreadyRated;
      }
      try {
        rig.tutor->rate_response(who, id, s);
        ASSERT_FALSE(expected) << "rating should have failed";
        if (unrated[who.session] == id) unrated[who.session].reset();
      } catch (const Error& e) {
        ASSERT_EQ(e.code(), expected);
      }
    } else {
      // Mostly short pauses so the bucket drains; now and then a long one.
      rig.advance(std::chrono::seconds(gap(rng) * (kind == 9 && rng() % 8 == 0 ? 200 : 1)));
    }
    ASSERT_EQ(rig.tutor->pending_rating(who), unrated[who.session]);
  }
  // Throttle bound over every window of admitted student queries.
  for (const auto& [session, times] : admitted) {
    if (session == "t4") continue;
    for (std::size_t a = 0; a < times.size(); ++a) {
      for (std::size_t b = a; b < times.size(); ++b) {
        const double hours = std::chrono::duration<double>(times[b] - times[a]).count() / 3600.0;
        ASSERT_LE(static_cast<double>(b - a + 1), 10.0 + 10.0 * hours + 1e-9);
      }
    }
  }
  EXPECT_GE(ops, 10000u);
  EXPECT_GT(accepted, 100u);
  EXPECT_GT(gated, 100u);
  EXPECT_GT(throttled, 0u);
  EXPECT_EQ(rig.tutor->records().size(), accepted);
}

// ---------------------------------------------------------------- config and auth

TEST(Config, ParsesAndResolvesPaths) {
  const auto cfg = parse_config(R"({
      "provider": {"kind": "scripted", "script": "s.json"},
      "throttle": {"capacity": 3, "refill_per_hour": 6},
      "paths": {"log": "logs/u.jsonl"},
      "server": {"port": 9000},
      "max_output_tokens": null
  })", "/etc/tf", "/usr/share/tf");
  EXPECT_EQ(cfg.provider.script, std::filesystem::path("/etc/tf/s.json"));
  EXPECT_EQ(cfg.throttle.capacity, 3);
  EXPECT_EQ(cfg.log, std::filesystem::path("/etc/tf/logs/u.jsonl"));
  EXPECT_EQ(cfg.prompts_dir, std::filesystem::path("/usr/share/tf/prompts"));
  EXPECT_EQ(cfg.port, 9000);
  EXPECT_FALSE(cfg.max_output_tokens);
  EXPECT_FALSE(cfg.provider.temperature);
  EXPECT_EQ(parse_config(R"({"provider":{"temperature":0.4}})", ".", ".").provider.temperature, 0.4);
  EXPECT_EQ(code_of([] { parse_config(R"({"provider":{"temperature":3}})", ".", "."); }),
            ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { parse_config(R"({"throttle":{"capacity":-1}})", ".", "."); }),
            ErrorCode::ConfigError);
}

TEST(Auth, TokensAndHeaders) {
  const auto creds = Credentials::from_json_text(
      R"({"tokens":[{"token":"abc","user":"alice","role":"student"},{"token":"zz","user":"root","role":"admin"}]})");
  EXPECT_EQ(creds.authenticate("abc"), (Identity{"abc", "alice", Role::Student}));
  EXPECT_EQ(creds.authenticate_header("Bearer zz").role, Role::Admin);
  EXPECT_EQ(code_of([&] { (void)creds.authenticate("nope"); }), ErrorCode::Unauthorized);
  EXPECT_EQ(code_of([&] { (void)creds.authenticate_header("abc"); }), ErrorCode::Unauthorized);
  EXPECT_EQ(code_of([&] { (void)creds.authenticate(""); }), ErrorCode::Unauthorized);
  EXPECT_EQ(code_of([] { Credentials::from_json_text(R"({"tokens":[{"token":"a","user":"b","role":"x"}]})"); }),
            ErrorCode::ConfigError);
}

// ---------------------------------------------------------------- http

class HttpFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    Credentials creds;
    creds.add("stu", "alice", Role::Student);
    creds.add("adm", "root", Role::Admin);
    server = std::make_unique<HttpServer>(*rig.tutor, creds);
    port = server->bind("127.0.0.1", 0);
    thread = std::thread([this] { server->run(); });
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
    client->set_read_timeout(30, 0);
  }
  void TearDown() override {
    server->stop();
    thread.join();
  }
  httplib::Headers auth(const std::string& token) {
    return {{"Authorization", "Bearer " + token}};
  }
  httplib::Result post(const std::string& path, const json& body, const std::string& token = "stu") {
    return client->Post(path.c_str(), auth(token), body.dump(), "application/json");
  }
  httplib::Result get(const std::string& path, const std::string& token = "stu") {
    return client->Get(path.c_str(), auth(token));
  }

  Rig rig;
  std::unique_ptr<HttpServer> server;
  int port = 0;
  std::thread thread;
  std::unique_ptr<httplib::Client> client;
};

TEST_F(HttpFixture, QueryStreamsAndMatchesStoredDocument) {
  const auto res = post("/api/query", {{"feature", "general-question"}, {"question", "How do loops end?"}});
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_NE(res->get_header_value("Content-Type").find("text/event-stream"), std::string::npos);
  const auto id = res->get_header_value("X-Response-Id");
  records::DocumentAssembler assembler;
  assembler.apply_all(records::decode_wire(res->body));
  EXPECT_TRUE(assembler.completed());
  const auto stored = get("/api/response/" + id);
  ASSERT_TRUE(stored);
  EXPECT_EQ(stored->status, 200);
  EXPECT_EQ(records::document_from_json(json::parse(stored->body)), assembler.document());

  const auto again = post("/api/query", {{"feature", "general-question"}, {"question", "again"}});
  EXPECT_EQ(again->status, 409);
  EXPECT_EQ(json::parse(again->body)["error"], "RatingRequired");

  EXPECT_EQ(post("/api/response/" + id + "/rating", {{"stars", 9}})->status, 400);
  const auto rated = post("/api/response/" + id + "/rating", {{"stars", 5}, {"reason", "good"}});
  EXPECT_EQ(rated->status, 200);
  EXPECT_EQ(json::parse(rated->body)["rated"], true);
  EXPECT_EQ(post("/api/response/" + id + "/rating", {{"stars", 5}})->status, 409);

  const auto follow = post("/api/query/" + id + "/followup", {{"question", "Why?"}});
  EXPECT_EQ(follow->status, 200);
  EXPECT_EQ(post("/api/query/r-777777/followup", {{"question", "Why?"}}, "adm")->status, 404);
}

TEST_F(HttpFixture, ErrorStatuses) {
  EXPECT_EQ(client->Get("/api/docs/printf")->status, 401);
  EXPECT_EQ(get("/api/docs/printf", "wrong")->status, 401);
  EXPECT_EQ(get("/api/docs/printf")->status, 200);
  EXPECT_EQ(json::parse(get("/api/docs/printf")->body)["name"], "printf");
  EXPECT_EQ(get("/api/docs/no_such_fn")->status, 404);
  EXPECT_EQ(get("/api/response/r-123456")->status, 404);
  EXPECT_EQ(get("/api/admin/stats")->status, 403);
  EXPECT_EQ(get("/api/admin/stats", "adm")->status, 200);
  EXPECT_EQ(post("/api/query", {{"feature", "general-question"}, {"question", "q"}, {"code", "x"}})->status, 400);
  EXPECT_EQ(post("/api/query", {{"feature", "general-question"}, {"question", std::string(5000, 'q')}})->status, 413);
  const auto bad = client->Post("/api/query", auth("stu"), "{nope", "application/json");
  EXPECT_EQ(bad->status, 400);
  EXPECT_EQ(json::parse(bad->body)["error"], "InvalidRequest");
}

TEST_F(HttpFixture, ThrottleAddsRetryAfter) {
  for (int i = 0; i < 10; ++i) {
    const auto res = post("/api/query", {{"feature", "general-question"}, {"question", "q"}});
    ASSERT_EQ(res->status, 200) << i;
    ASSERT_EQ(post("/api/response/" + res->get_header_value("X-Response-Id") + "/rating", {{"stars", 3}})->status, 200);
  }
  const auto res = post("/api/query", {{"feature", "general-question"}, {"question", "q"}});
  EXPECT_EQ(res->status, 429);
  EXPECT_EQ(res->get_header_value("Retry-After"), "360");
}
