#include "tutorforge/records/usage.hpp"

#include <fstream>
#include <map>

#include "tutorforge/core/error.hpp"
#include "tutorforge/core/text.hpp"

namespace tutorforge::records {

using nlohmann::json;

namespace {

template <typename E, std::size_t N>
std::optional<E> parse_enum(std::string_view s, const E (&all)[N]) {
  for (auto e : all) {
    if (to_string(e) == s) return e;
  }
  return std::nullopt;
}

constexpr Correctness kAllCorrectness[] = {Correctness::Correct, Correctness::Incorrect};
constexpr Helpfulness kAllHelpfulness[] = {Helpfulness::Helpful, Helpfulness::NotHelpful,
                                           Helpfulness::NotApplicable};

template <typename T>
T required(std::optional<T> v, std::string_view what, std::string_view text) {
  if (!v) throw Error(ErrorCode::InvalidRequest, "unknown " + std::string(what) + " '" + std::string(text) + "'");
  return *v;
}

json opt(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

std::optional<std::string> read_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

}  // namespace

std::string_view to_string(QueryCategory c) noexcept {
  switch (c) {
    case QueryCategory::ErrorMessageInterpretation: return "error-message-interpretation";
    case QueryCategory::ProblemSourceIdentification: return "problem-source-identification";
    case QueryCategory::BuggyCodeResolution: return "buggy-code-resolution";
    case QueryCategory::ExplainErrorMessage: return "explain-error-message";
    case QueryCategory::CodeExecutionProbes: return "code-execution-probes";
    case QueryCategory::CodeAndConceptualClarification: return "code-and-conceptual-clarification";
    case QueryCategory::FunctionSpecificationQueries: return "function-specification-queries";
    case QueryCategory::HighLevelCodingGuidance: return "high-level-coding-guidance";
    case QueryCategory::DirectCodeSolution: return "direct-code-solution";
    case QueryCategory::ExplainCode: return "explain-code";
  }
  return "";
}

std::string_view to_string(Directness d) noexcept {
  switch (d) {
    case Directness::ExactSolutionCode: return "exact-solution-code";
    case Directness::ExactSolutionPseudocode: return "exact-solution-pseudocode";
    case Directness::StepToFixSemanticIssue: return "step-to-fix-semantic-issue";
    case Directness::StepToFixSyntaxIssue: return "step-to-fix-syntax-issue";
    case Directness::StepToFixExternalIssue: return "step-to-fix-external-issue";
    case Directness::ExampleHighLevelCode: return "example-high-level-code";
    case Directness::ExampleHighLevelPseudocode: return "example-high-level-pseudocode";
    case Directness::ConceptualExplanation: return "conceptual-explanation";
    case Directness::NotApplicable: return "n/a";
  }
  return "";
}

std::string_view to_string(Correctness c) noexcept {
  return c == Correctness::Correct ? "correct" : "incorrect";
}

std::string_view to_string(Helpfulness h) noexcept {
  switch (h) {
    case Helpfulness::Helpful: return "helpful";
    case Helpfulness::NotHelpful: return "not-helpful";
    case Helpfulness::NotApplicable: return "n/a";
  }
  return "";
}

std::optional<QueryCategory> parse_category(std::string_view s) noexcept {
  return parse_enum(s, kAllCategories);
}
std::optional<Directness> parse_directness(std::string_view s) noexcept {
  return parse_enum(s, kAllDirectness);
}
std::optional<Correctness> parse_correctness(std::string_view s) noexcept {
  return parse_enum(s, kAllCorrectness);
}
std::optional<Helpfulness> parse_helpfulness(std::string_view s) noexcept {
  return parse_enum(s, kAllHelpfulness);
}

void CoderLabels::validate() const {
  const bool na = helpfulness == Helpfulness::NotApplicable;
  if (na != (correctness == Correctness::Incorrect)) {
    throw Error(ErrorCode::InvalidRequest,
                "helpfulness must be n/a exactly for incorrect responses (coder " + coder_id + ")");
  }
}

json to_json(const Query& q) {
  return {{"id", q.id},
          {"user", q.user},
          {"feature", std::string(to_string(q.feature))},
          {"subkind", q.subkind ? json(std::string(to_string(*q.subkind))) : json(nullptr)},
          {"question", opt(q.question)},
          {"code", opt(q.code)},
          {"intended_behavior", opt(q.intended_behavior)},
          {"parent_response", opt(q.parent_response)},
          {"created_at", format_timestamp(q.created_at)},
          {"version", q.version}};
}

Query query_from_json(const json& j) {
  Query q;
  q.id = j.at("id").get<std::string>();
  if (j.contains("user") && !j.at("user").is_null()) q.user = j.at("user").get<std::string>();
  const auto feature = j.at("feature").get<std::string>();
  q.feature = required(parse_feature(feature), "feature", feature);
  if (auto sub = read_opt(j, "subkind")) q.subkind = required(parse_inline_subkind(*sub), "subkind", *sub);
  q.question = read_opt(j, "question");
  q.code = read_opt(j, "code");
  q.intended_behavior = read_opt(j, "intended_behavior");
  q.parent_response = read_opt(j, "parent_response");
  q.created_at = parse_timestamp(j.at("created_at").get<std::string>());
  q.version = j.value("version", "");
  return q;
}

json to_json(const CoderLabels& l) {
  return {{"query_category", std::string(to_string(l.query_category))},
          {"directness", std::string(to_string(l.directness))},
          {"correctness", std::string(to_string(l.correctness))},
          {"helpfulness", std::string(to_string(l.helpfulness))},
          {"coder_id", l.coder_id}};
}

CoderLabels labels_from_json(const json& j) {
  const auto s = [&](const char* k) { return j.at(k).get<std::string>(); };
  CoderLabels l;
  l.query_category = required(parse_category(s("query_category")), "query category", s("query_category"));
  l.directness = required(parse_directness(s("directness")), "directness", s("directness"));
  l.correctness = required(parse_correctness(s("correctness")), "correctness", s("correctness"));
  l.helpfulness = required(parse_helpfulness(s("helpfulness")), "helpfulness", s("helpfulness"));
  l.coder_id = j.value("coder_id", "");
  l.validate();
  return l;
}

namespace {

json rating_json(const Rating& r) {
  return {{"stars", r.stars}, {"reason", r.reason}, {"created_at", format_timestamp(r.created_at)}};
}

Rating rating_from_json(const json& j) {
  return {j.at("stars").get<int>(), j.value("reason", ""),
          parse_timestamp(j.at("created_at").get<std::string>())};
}

}  // namespace

json to_json(const UsageRecord& r) {
  json labels = json::array();
  for (const auto& l : r.labels) labels.push_back(to_json(l));
  return {{"query", to_json(r.query)},
          {"response", to_json(r.response)},
          {"rating", r.rating ? rating_json(*r.rating) : json(nullptr)},
          {"labels", labels}};
}

UsageRecord usage_from_json(const json& j) {
  UsageRecord r;
  r.query = query_from_json(j.at("query"));
  r.response = document_from_json(j.at("response"));
  if (j.contains("rating") && !j.at("rating").is_null()) r.rating = rating_from_json(j.at("rating"));
  if (j.contains("labels")) {
    for (const auto& l : j.at("labels")) r.labels.push_back(labels_from_json(l));
  }
  return r;
}

RecordLog::RecordLog(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
}

void RecordLog::append_line(const json& line) {
  const auto text = line.dump() + "\n";
  std::lock_guard lock(mutex_);
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot append to " + path_.string());
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failed on " + path_.string());
}

void RecordLog::append_usage(const UsageRecord& record) {
  auto line = to_json(record);
  line["kind"] = "usage";
  append_line(line);
}

void RecordLog::append_rating(const std::string& response_id, const Rating& rating) {
  auto line = rating_json(rating);
  line["kind"] = "rating";
  line["response_id"] = response_id;
  append_line(line);
}

void RecordLog::append_labels(const std::string& response_id, const CoderLabels& labels) {
  append_line({{"kind", "labels"}, {"response_id", response_id}, {"labels", to_json(labels)}});
}

std::vector<UsageRecord> parse_log(std::string_view text, std::string_view name) {
  std::vector<UsageRecord> records;
  std::map<std::string, std::size_t> by_response;
  std::size_t line_no = 0;
  for (const auto& line : text::split_lines(text)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto where = std::string(name) + ":" + std::to_string(line_no) + ": ";
    try {
      const auto j = json::parse(line);
      const auto kind = j.value("kind", "usage");
      if (kind == "usage") {
        auto record = usage_from_json(j);
        by_response[record.response.id] = records.size();
        records.push_back(std::move(record));
        continue;
      }
      const auto id = j.at("response_id").get<std::string>();
      const auto it = by_response.find(id);
      if (it == by_response.end()) {
        throw Error(ErrorCode::InvalidRequest, "refers to unknown response " + id);
      }
      if (kind == "rating") {
        records[it->second].rating = rating_from_json(j);
      } else if (kind == "labels") {
        records[it->second].labels.push_back(labels_from_json(j.at("labels")));
      } else {
        throw Error(ErrorCode::InvalidRequest, "unknown line kind '" + kind + "'");
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::InvalidRequest, where + e.what());
    } catch (const Error& e) {
      throw Error(e.code() == ErrorCode::ConfigError ? ErrorCode::InvalidRequest : e.code(),
                  where + e.what());
    }
  }
  return records;
}

std::vector<UsageRecord> load_log(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return {};
  return parse_log(text::read_file(path), path.filename().string());
}

}  // namespace tutorforge::records
