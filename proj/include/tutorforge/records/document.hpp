#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace tutorforge::records {

enum class Finish { Complete, Truncated, Refused };

std::string_view to_string(Finish finish) noexcept;
std::optional<Finish> parse_finish(std::string_view text) noexcept;

inline constexpr const char* kDisclaimerText =
    "Responses are generated by an AI model and can be wrong. Check them against the course "
    "material before relying on them.";

/// Section ids the service puts on the wire besides the parser's own.
inline constexpr const char* kDisclaimerSection = "disclaimer";
inline constexpr const char* kWithheldSection = "withheld";
inline constexpr const char* kRefusalSection = "refusal";
inline constexpr const char* kFunctionsSection = "functions";
inline constexpr const char* kSuggestionsSection = "suggestions";
inline constexpr const char* kPseudocodeSection = "pseudocode";
inline constexpr const char* kAnnotatedSection = "annotated";

struct Disclaimer {
  std::string text;
  bool operator==(const Disclaimer&) const = default;
};

/// Free text of one section: "answer", "summary", "changes", "note", "refusal".
struct AnswerText {
  std::string section;
  std::string text;
  bool operator==(const AnswerText&) const = default;
};

struct ListingLine {
  std::string text;
  std::optional<std::string> explanation;
  bool operator==(const ListingLine&) const = default;
};

/// Lines shown as written, such as line-by-line explanations of the student's
/// own code or an inline example.
struct CodeListing {
  std::string section;
  std::vector<ListingLine> lines;
  bool operator==(const CodeListing&) const = default;
};

struct PseudoLine {
  std::size_t depth = 0;
  std::string text;
  std::string explanation;
  bool operator==(const PseudoLine&) const = default;
};

struct PseudoCode {
  std::vector<PseudoLine> lines;
  bool operator==(const PseudoCode&) const = default;
};

struct AnnotatedLine {
  std::string kind;  // unchanged / changed / removed / added
  std::string text;
  std::optional<std::string> explanation;
  bool operator==(const AnnotatedLine&) const = default;
};

struct Annotated {
  std::vector<AnnotatedLine> rows;
  bool operator==(const Annotated&) const = default;
};

struct RelevantFunctions {
  std::vector<std::string> names;
  bool operator==(const RelevantFunctions&) const = default;
};

struct SuggestedFollowUps {
  std::vector<std::string> items;
  bool operator==(const SuggestedFollowUps&) const = default;
};

using Segment = std::variant<Disclaimer, AnswerText, CodeListing, PseudoCode, Annotated,
                             RelevantFunctions, SuggestedFollowUps>;

/// Structured assistant output. Segments appear in the order their content
/// first arrived; content of a repeated section id joins the earlier segment.
struct ResponseDocument {
  std::string id;
  std::string query_id;
  std::vector<Segment> segments;
  Finish finish = Finish::Complete;
  bool operator==(const ResponseDocument&) const = default;

  /// Exactly one Disclaimer; a refused document holds only the disclaimer and
  /// the refusal text. Throws Error(InvalidRequest) otherwise.
  void validate() const;

  [[nodiscard]] const AnswerText* text_of(std::string_view section) const;
};

/// Builds a document segment by segment while keeping the merge rule.
class DocumentBuilder {
 public:
  explicit DocumentBuilder(std::string id = {}, std::string query_id = {});

  void disclaimer(std::string text = kDisclaimerText);
  void append_text(const std::string& section, std::string_view fragment);
  void add_listing_line(const std::string& section, ListingLine line);
  void add_pseudo_line(PseudoLine line);
  void add_annotated_line(AnnotatedLine line);
  void add_function(std::string name);
  void add_suggestion(std::string item);
  /// Drops everything except the disclaimer.
  void withhold();
  void set_finish(Finish finish) { doc_.finish = finish; }

  [[nodiscard]] const ResponseDocument& document() const noexcept { return doc_; }
  ResponseDocument take() { return std::move(doc_); }

 private:
  template <typename T>
  T& segment(const std::string& key);

  ResponseDocument doc_;
  std::vector<std::string> keys_;  // parallel to segments
};

nlohmann::json to_json(const ResponseDocument& doc);
ResponseDocument document_from_json(const nlohmann::json& j);

}  // namespace tutorforge::records
