#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tutorforge/core/feature.hpp"
#include "tutorforge/markup/grammar.hpp"
#include "tutorforge/prompts/template.hpp"

namespace tutorforge::prompts {

struct PromptText {
  std::string rendered;
  std::vector<std::string> expected_sections;
  std::vector<std::string> stop_tokens;
  bool operator==(const PromptText&) const = default;
};

struct InputLimits {
  std::size_t question_chars = 2000;
  std::size_t code_lines = 300;
};

/// Student-supplied slot values. Empty strings count as absent.
struct FeatureInputs {
  std::optional<std::string> question;
  std::optional<std::string> code;
  std::optional<std::string> intended_behavior;
  std::optional<std::string> prior_exchange;
};

/// A labeled site handed to the annotation-explanation prompt.
struct LabelSite {
  std::string id;    // "L1"
  std::string kind;  // "changed" | "removed" | "added"
  std::string where; // "line 3" or "after line 2"
  std::string text;  // buggy line text; empty for added rows
};

/// Appended to every feature preamble.
extern const char* const kRelevanceGuard;

/// Loaded prompt templates plus the markup grammar they target.
class PromptLibrary {
 public:
  /// Reads every *.prompt file and grammar.json in `dir`.
  static PromptLibrary load(const std::filesystem::path& dir, InputLimits limits = {});

  PromptLibrary(std::map<std::string, PromptTemplate> templates, markup::MarkupGrammar grammar,
                InputLimits limits);

  [[nodiscard]] const markup::MarkupGrammar& grammar() const noexcept { return grammar_; }
  [[nodiscard]] const InputLimits& limits() const noexcept { return limits_; }
  [[nodiscard]] const std::map<std::string, PromptTemplate>& templates() const noexcept {
    return templates_;
  }
  /// Throws Error(TemplateError) for unknown ids.
  [[nodiscard]] const PromptTemplate& get(const std::string& id) const;

  /// Template id serving a feature, e.g. "inline-example-code".
  static std::string template_id(FeatureKind feature, std::optional<InlineSubKind> subkind = {});

  /// Errors: MissingSlot, SlotTooLong.
  [[nodiscard]] PromptText build_feature_prompt(FeatureKind feature, const FeatureInputs& inputs,
                                                std::optional<InlineSubKind> subkind = {}) const;
  [[nodiscard]] PromptText build_pseudocode_prompt(const std::string& code) const;
  [[nodiscard]] PromptText build_fix_prompt(const std::string& buggy_code,
                                            const std::string& intent) const;
  /// Errors: NoLabels when `sites` is empty.
  [[nodiscard]] PromptText build_annotation_explanation_prompt(
      const std::string& annotated_listing, const std::vector<LabelSite>& sites,
      const std::string& fixed_code) const;
  [[nodiscard]] PromptText build_followup_suggestion_prompt(const std::string& exchange) const;

  /// Renders any template with already-validated slot values.
  [[nodiscard]] PromptText render(const PromptTemplate& tmpl,
                                  const std::map<std::string, std::string>& slots,
                                  bool with_relevance_guard) const;

 private:
  void check_code(const std::string& code) const;
  void check_text(const std::string& slot, const std::string& value) const;

  std::map<std::string, PromptTemplate> templates_;
  markup::MarkupGrammar grammar_;
  InputLimits limits_;
};

/// JSON form of a grammar, stored as grammar.json next to the templates.
std::string grammar_to_json(const markup::MarkupGrammar& grammar);
markup::MarkupGrammar grammar_from_json(const std::string& json_text);

/// Most suggestions a follow-up suggestion response may contribute.
inline constexpr std::size_t kMaxSuggestions = 3;

}  // namespace tutorforge::prompts
