#include "tutorforge/records/document.hpp"

#include "tutorforge/core/error.hpp"

namespace tutorforge::records {

using nlohmann::json;

std::string_view to_string(Finish finish) noexcept {
  switch (finish) {
    case Finish::Complete: return "complete";
    case Finish::Truncated: return "truncated";
    case Finish::Refused: return "refused";
  }
  return "complete";
}

std::optional<Finish> parse_finish(std::string_view text) noexcept {
  for (auto f : {Finish::Complete, Finish::Truncated, Finish::Refused}) {
    if (to_string(f) == text) return f;
  }
  return std::nullopt;
}

void ResponseDocument::validate() const {
  std::size_t disclaimers = 0;
  for (const auto& s : segments) disclaimers += std::holds_alternative<Disclaimer>(s);
  if (disclaimers != 1) {
    throw Error(ErrorCode::InvalidRequest,
                "response " + id + " has " + std::to_string(disclaimers) + " disclaimers");
  }
  if (finish != Finish::Refused) return;
  if (!text_of(kRefusalSection)) {
    throw Error(ErrorCode::InvalidRequest, "refused response " + id + " has no refusal text");
  }
  for (const auto& s : segments) {
    if (std::holds_alternative<Disclaimer>(s)) continue;
    const auto* text = std::get_if<AnswerText>(&s);
    if (!text || text->section != kRefusalSection) {
      throw Error(ErrorCode::InvalidRequest, "refused response " + id + " carries content");
    }
  }
}

const AnswerText* ResponseDocument::text_of(std::string_view section) const {
  for (const auto& s : segments) {
    if (const auto* t = std::get_if<AnswerText>(&s); t && t->section == section) return t;
  }
  return nullptr;
}

DocumentBuilder::DocumentBuilder(std::string id, std::string query_id) {
  doc_.id = std::move(id);
  doc_.query_id = std::move(query_id);
}

template <typename T>
T& DocumentBuilder::segment(const std::string& key) {
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    if (keys_[i] == key) return std::get<T>(doc_.segments[i]);
  }
  keys_.push_back(key);
  doc_.segments.emplace_back(T{});
  return std::get<T>(doc_.segments.back());
}

void DocumentBuilder::disclaimer(std::string text) {
  segment<Disclaimer>(std::string(kDisclaimerSection) + "#").text = std::move(text);
}

void DocumentBuilder::append_text(const std::string& section, std::string_view fragment) {
  if (fragment.empty()) return;
  auto& t = segment<AnswerText>("text:" + section);
  t.section = section;
  t.text += fragment;
}

void DocumentBuilder::add_listing_line(const std::string& section, ListingLine line) {
  auto& l = segment<CodeListing>("listing:" + section);
  l.section = section;
  l.lines.push_back(std::move(line));
}

void DocumentBuilder::add_pseudo_line(PseudoLine line) {
  segment<PseudoCode>("pseudocode").lines.push_back(std::move(line));
}

void DocumentBuilder::add_annotated_line(AnnotatedLine line) {
  segment<Annotated>("annotated").rows.push_back(std::move(line));
}

void DocumentBuilder::add_function(std::string name) {
  segment<RelevantFunctions>("functions").names.push_back(std::move(name));
}

void DocumentBuilder::add_suggestion(std::string item) {
  segment<SuggestedFollowUps>("suggestions").items.push_back(std::move(item));
}

void DocumentBuilder::withhold() {
  std::vector<Segment> kept;
  std::vector<std::string> kept_keys;
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    if (std::holds_alternative<Disclaimer>(doc_.segments[i])) {
      kept.push_back(std::move(doc_.segments[i]));
      kept_keys.push_back(keys_[i]);
    }
  }
  doc_.segments = std::move(kept);
  keys_ = std::move(kept_keys);
}

namespace {

json optional_text(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

std::optional<std::string> read_optional(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

json segment_json(const Segment& segment) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Disclaimer>) {
          return {{"type", "disclaimer"}, {"text", s.text}};
        } else if constexpr (std::is_same_v<T, AnswerText>) {
          return {{"type", "text"}, {"section", s.section}, {"text", s.text}};
        } else if constexpr (std::is_same_v<T, CodeListing>) {
          json lines = json::array();
          for (const auto& l : s.lines) {
            lines.push_back({{"text", l.text}, {"explanation", optional_text(l.explanation)}});
          }
          return {{"type", "listing"}, {"section", s.section}, {"lines", lines}};
        } else if constexpr (std::is_same_v<T, PseudoCode>) {
          json lines = json::array();
          for (const auto& l : s.lines) {
            lines.push_back({{"depth", l.depth}, {"text", l.text}, {"explanation", l.explanation}});
          }
          return {{"type", "pseudocode"}, {"lines", lines}};
        } else if constexpr (std::is_same_v<T, Annotated>) {
          json rows = json::array();
          for (const auto& r : s.rows) {
            rows.push_back({{"kind", r.kind}, {"text", r.text},
                            {"explanation", optional_text(r.explanation)}});
          }
          return {{"type", "annotated"}, {"rows", rows}};
        } else if constexpr (std::is_same_v<T, RelevantFunctions>) {
          return {{"type", "functions"}, {"names", s.names}};
        } else {
          return {{"type", "suggestions"}, {"items", s.items}};
        }
      },
      segment);
}

Segment segment_from_json(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "disclaimer") return Disclaimer{j.at("text").get<std::string>()};
  if (type == "text") {
    return AnswerText{j.at("section").get<std::string>(), j.at("text").get<std::string>()};
  }
  if (type == "listing") {
    CodeListing l{j.at("section").get<std::string>(), {}};
    for (const auto& line : j.at("lines")) {
      l.lines.push_back({line.at("text").get<std::string>(), read_optional(line, "explanation")});
    }
    return l;
  }
  if (type == "pseudocode") {
    PseudoCode p;
    for (const auto& line : j.at("lines")) {
      p.lines.push_back({line.at("depth").get<std::size_t>(), line.at("text").get<std::string>(),
                         line.at("explanation").get<std::string>()});
    }
    return p;
  }
  if (type == "annotated") {
    Annotated a;
    for (const auto& r : j.at("rows")) {
      a.rows.push_back({r.at("kind").get<std::string>(), r.at("text").get<std::string>(),
                        read_optional(r, "explanation")});
    }
    return a;
  }
  if (type == "functions") return RelevantFunctions{j.at("names").get<std::vector<std::string>>()};
  if (type == "suggestions") {
    return SuggestedFollowUps{j.at("items").get<std::vector<std::string>>()};
  }
  throw Error(ErrorCode::InvalidRequest, "unknown segment type '" + type + "'");
}

}  // namespace

json to_json(const ResponseDocument& doc) {
  json segments = json::array();
  for (const auto& s : doc.segments) segments.push_back(segment_json(s));
  return {{"id", doc.id},
          {"query_id", doc.query_id},
          {"finish", std::string(to_string(doc.finish))},
          {"segments", segments}};
}

ResponseDocument document_from_json(const json& j) {
  try {
    ResponseDocument doc;
    doc.id = j.at("id").get<std::string>();
    doc.query_id = j.at("query_id").get<std::string>();
    const auto finish = parse_finish(j.at("finish").get<std::string>());
    if (!finish) throw Error(ErrorCode::InvalidRequest, "unknown finish value");
    doc.finish = *finish;
    for (const auto& s : j.at("segments")) doc.segments.push_back(segment_from_json(s));
    return doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidRequest, std::string("malformed response document: ") + e.what());
  }
}

}  // namespace tutorforge::records
