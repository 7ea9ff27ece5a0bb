#include "tutorforge/records/wire.hpp"

#include "tutorforge/core/error.hpp"
#include "tutorforge/core/text.hpp"
#include "tutorforge/gateway/sse.hpp"
#include "tutorforge/scaffold/pseudocode.hpp"

namespace tutorforge::records {

using nlohmann::json;
namespace mk = markup;

WireEvent to_wire(const mk::StreamEvent& event) {
  return std::visit([](const auto& e) -> WireEvent { return e; }, event);
}

std::string_view wire_name(const WireEvent& event) noexcept {
  static constexpr std::string_view names[] = {
      "ResponseStarted", "SectionStart", "TextDelta",         "LineCompleted", "SectionEnd",
      "ProgressLineCount", "ParseWarning", "ResponseCompleted", "StreamFailed"};
  return names[event.index()];
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

json to_json(const WireEvent& event) {
  json j = std::visit(
      overloaded{
          [](const ResponseStarted& e) {
            json o{{"response_id", e.response_id}, {"query_id", e.query_id}, {"feature", e.feature}};
            if (e.parent) o["parent"] = *e.parent;
            return o;
          },
          [](const mk::SectionStart& e) { return json{{"section", e.section}}; },
          [](const mk::TextDelta& e) { return json{{"section", e.section}, {"fragment", e.fragment}}; },
          [](const mk::LineCompleted& e) {
            json o{{"section", e.section}, {"visible", e.visible}};
            if (e.explanation) o["explanation"] = *e.explanation;
            if (!e.tag.empty()) o["tag"] = e.tag;
            return o;
          },
          [](const mk::SectionEnd& e) { return json{{"section", e.section}}; },
          [](const mk::ProgressLineCount& e) { return json{{"count", e.count}}; },
          [](const mk::ParseWarning& e) { return json{{"detail", e.detail}}; },
          [](const ResponseCompleted& e) {
            return json{{"response_id", e.response_id}, {"finish", std::string(to_string(e.finish))}};
          },
          [](const StreamFailed& e) { return json{{"error", e.error}, {"message", e.message}}; },
      },
      event);
  j["event"] = std::string(wire_name(event));
  return j;
}

WireEvent wire_from_json(const json& j) {
  try {
    const auto name = j.at("event").get<std::string>();
    const auto str = [&](const char* key) { return j.at(key).get<std::string>(); };
    if (name == "ResponseStarted") {
      ResponseStarted e{str("response_id"), str("query_id"), str("feature"), std::nullopt};
      if (j.contains("parent")) e.parent = str("parent");
      return e;
    }
    if (name == "SectionStart") return mk::SectionStart{str("section")};
    if (name == "TextDelta") return mk::TextDelta{str("section"), str("fragment")};
    if (name == "LineCompleted") {
      mk::LineCompleted e{str("section"), str("visible"), std::nullopt, ""};
      if (j.contains("explanation")) e.explanation = str("explanation");
      if (j.contains("tag")) e.tag = str("tag");
      return e;
    }
    if (name == "SectionEnd") return mk::SectionEnd{str("section")};
    if (name == "ProgressLineCount") return mk::ProgressLineCount{j.at("count").get<std::size_t>()};
    if (name == "ParseWarning") return mk::ParseWarning{str("detail")};
    if (name == "ResponseCompleted") {
      const auto finish = parse_finish(str("finish"));
      if (!finish) throw Error(ErrorCode::InvalidRequest, "unknown finish value");
      return ResponseCompleted{str("response_id"), *finish};
    }
    if (name == "StreamFailed") return StreamFailed{str("error"), str("message")};
    throw Error(ErrorCode::InvalidRequest, "unknown wire event '" + name + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidRequest, std::string("malformed wire event: ") + e.what());
  }
}

std::string encode_wire(const WireEvent& event) {
  return gateway::encode_sse(wire_name(event), to_json(event).dump());
}

std::vector<WireEvent> decode_wire(std::string_view body) {
  gateway::SseDecoder decoder;
  auto frames = decoder.feed(body);
  auto tail = decoder.finish();
  frames.insert(frames.end(), tail.begin(), tail.end());
  std::vector<WireEvent> events;
  for (const auto& frame : frames) {
    json payload;
    try {
      payload = json::parse(frame.data);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::InvalidRequest, std::string("undecodable wire payload: ") + e.what());
    }
    auto event = wire_from_json(payload);
    if (wire_name(event) != frame.event) {
      throw Error(ErrorCode::InvalidRequest,
                  "event name '" + frame.event + "' does not match its payload");
    }
    events.push_back(std::move(event));
  }
  return events;
}

Segment* DocumentAssembler::find(std::size_t type_index, const std::string& section) {
  for (auto& s : doc_.segments) {
    if (s.index() != type_index) continue;
    if (const auto* t = std::get_if<AnswerText>(&s); t && t->section != section) continue;
    if (const auto* l = std::get_if<CodeListing>(&s); l && l->section != section) continue;
    return &s;
  }
  return nullptr;
}

Segment& DocumentAssembler::find_or_add(Segment fresh, const std::string& section) {
  if (auto* s = find(fresh.index(), section)) return *s;
  doc_.segments.push_back(std::move(fresh));
  return doc_.segments.back();
}

void DocumentAssembler::apply(const WireEvent& event) {
  std::visit(
      overloaded{
          [&](const ResponseStarted& e) {
            doc_.id = e.response_id;
            doc_.query_id = e.query_id;
          },
          [&](const mk::SectionStart& e) {
            if (e.section != kWithheldSection) return;
            std::erase_if(doc_.segments,
                          [](const Segment& s) { return !std::holds_alternative<Disclaimer>(s); });
          },
          [&](const mk::TextDelta& e) {
            if (e.fragment.empty()) return;
            if (e.section == kDisclaimerSection) {
              std::get<Disclaimer>(find_or_add(Disclaimer{}, e.section)).text += e.fragment;
              return;
            }
            std::get<AnswerText>(find_or_add(AnswerText{e.section, ""}, e.section)).text +=
                e.fragment;
          },
          [&](const mk::LineCompleted& e) {
            if (e.section == kPseudocodeSection) {
              std::get<PseudoCode>(find_or_add(PseudoCode{}, e.section))
                  .lines.push_back({scaffold::indent_depth(e.visible),
                                    std::string(text::trim(e.visible)), e.explanation.value_or("")});
            } else if (e.section == kAnnotatedSection) {
              std::get<Annotated>(find_or_add(Annotated{}, e.section))
                  .rows.push_back({e.tag, e.visible, e.explanation});
            } else if (e.section == kFunctionsSection) {
              std::get<RelevantFunctions>(find_or_add(RelevantFunctions{}, e.section))
                  .names.push_back(e.visible);
            } else if (e.section == kSuggestionsSection) {
              std::get<SuggestedFollowUps>(find_or_add(SuggestedFollowUps{}, e.section))
                  .items.push_back(e.visible);
            } else {
              std::get<CodeListing>(find_or_add(CodeListing{e.section, {}}, e.section))
                  .lines.push_back({e.visible, e.explanation});
            }
          },
          [](const mk::SectionEnd&) {},
          [&](const mk::ProgressLineCount& e) { progress_ = e.count; },
          [&](const mk::ParseWarning& e) { warnings_.push_back(e.detail); },
          [&](const ResponseCompleted& e) {
            doc_.finish = e.finish;
            completed_ = true;
          },
          [&](const StreamFailed& e) { failure_ = e; },
      },
      event);
}

void DocumentAssembler::apply_all(const std::vector<WireEvent>& events) {
  for (const auto& e : events) apply(e);
}

}  // namespace tutorforge::records
