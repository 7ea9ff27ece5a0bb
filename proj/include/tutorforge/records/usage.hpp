#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tutorforge/core/feature.hpp"
#include "tutorforge/core/time.hpp"
#include "tutorforge/records/document.hpp"

namespace tutorforge::records {

struct Query {
  std::string id;
  std::string user;
  FeatureKind feature = FeatureKind::GeneralQuestion;
  std::optional<InlineSubKind> subkind;
  std::optional<std::string> question;
  std::optional<std::string> code;
  std::optional<std::string> intended_behavior;
  std::optional<std::string> parent_response;
  Timestamp created_at{};
  std::string version;  // deployment tag such as "v1" or "v2"
  bool operator==(const Query&) const = default;
};

struct Rating {
  int stars = 0;
  std::string reason;
  Timestamp created_at{};
  bool operator==(const Rating&) const = default;
};

// Codebook of the offline thematic analysis.
enum class QueryCategory {
  ErrorMessageInterpretation,
  ProblemSourceIdentification,
  BuggyCodeResolution,
  ExplainErrorMessage,
  CodeExecutionProbes,
  CodeAndConceptualClarification,
  FunctionSpecificationQueries,
  HighLevelCodingGuidance,
  DirectCodeSolution,
  ExplainCode,
};

/// Most revealing first.
enum class Directness {
  ExactSolutionCode,
  ExactSolutionPseudocode,
  StepToFixSemanticIssue,
  StepToFixSyntaxIssue,
  StepToFixExternalIssue,
  ExampleHighLevelCode,
  ExampleHighLevelPseudocode,
  ConceptualExplanation,
  NotApplicable,
};

enum class Correctness { Correct, Incorrect };
enum class Helpfulness { Helpful, NotHelpful, NotApplicable };

inline constexpr QueryCategory kAllCategories[] = {
    QueryCategory::ErrorMessageInterpretation, QueryCategory::ProblemSourceIdentification,
    QueryCategory::BuggyCodeResolution,        QueryCategory::ExplainErrorMessage,
    QueryCategory::CodeExecutionProbes,        QueryCategory::CodeAndConceptualClarification,
    QueryCategory::FunctionSpecificationQueries, QueryCategory::HighLevelCodingGuidance,
    QueryCategory::DirectCodeSolution,         QueryCategory::ExplainCode,
};
inline constexpr Directness kAllDirectness[] = {
    Directness::ExactSolutionCode,         Directness::ExactSolutionPseudocode,
    Directness::StepToFixSemanticIssue,    Directness::StepToFixSyntaxIssue,
    Directness::StepToFixExternalIssue,    Directness::ExampleHighLevelCode,
    Directness::ExampleHighLevelPseudocode, Directness::ConceptualExplanation,
    Directness::NotApplicable,
};

std::string_view to_string(QueryCategory c) noexcept;
std::string_view to_string(Directness d) noexcept;
std::string_view to_string(Correctness c) noexcept;
std::string_view to_string(Helpfulness h) noexcept;
std::optional<QueryCategory> parse_category(std::string_view s) noexcept;
std::optional<Directness> parse_directness(std::string_view s) noexcept;
std::optional<Correctness> parse_correctness(std::string_view s) noexcept;
std::optional<Helpfulness> parse_helpfulness(std::string_view s) noexcept;

struct CoderLabels {
  QueryCategory query_category = QueryCategory::CodeAndConceptualClarification;
  Directness directness = Directness::ConceptualExplanation;
  Correctness correctness = Correctness::Correct;
  Helpfulness helpfulness = Helpfulness::Helpful;
  std::string coder_id;
  bool operator==(const CoderLabels&) const = default;

  /// Helpfulness is n/a exactly when the response is incorrect. Throws
  /// Error(InvalidRequest).
  void validate() const;
};

struct UsageRecord {
  Query query;
  ResponseDocument response;
  std::optional<Rating> rating;
  std::vector<CoderLabels> labels;  // one entry per coder
  bool operator==(const UsageRecord&) const = default;
};

nlohmann::json to_json(const Query& q);
Query query_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CoderLabels& l);
CoderLabels labels_from_json(const nlohmann::json& j);
nlohmann::json to_json(const UsageRecord& r);
UsageRecord usage_from_json(const nlohmann::json& j);

/// Append-only JSON Lines log. A usage line is written when a response
/// completes; ratings and coder labels follow as separate lines that refer to
/// the response id.
class RecordLog {
 public:
  explicit RecordLog(std::filesystem::path path);

  void append_usage(const UsageRecord& record);
  void append_rating(const std::string& response_id, const Rating& rating);
  void append_labels(const std::string& response_id, const CoderLabels& labels);

  [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

 private:
  void append_line(const nlohmann::json& line);

  std::filesystem::path path_;
  std::mutex mutex_;
};

/// Folds a log into records in order of their usage lines. Errors:
/// IoError, InvalidRequest ("file:line: reason").
std::vector<UsageRecord> load_log(const std::filesystem::path& path);
std::vector<UsageRecord> parse_log(std::string_view text, std::string_view name = "log");

}  // namespace tutorforge::records
