#include "tutorforge/core/feature.hpp"

namespace tutorforge {

std::string_view to_string(FeatureKind kind) noexcept {
  switch (kind) {
    case FeatureKind::GeneralQuestion: return "general-question";
    case FeatureKind::QuestionFromCode: return "question-from-code";
    case FeatureKind::ExplainCode: return "explain-code";
    case FeatureKind::HelpFixCode: return "help-fix-code";
    case FeatureKind::HelpWriteCode: return "help-write-code";
    case FeatureKind::InlineExploration: return "inline-exploration";
    case FeatureKind::FollowUp: return "follow-up";
  }
  return "unknown";
}

std::string_view to_string(InlineSubKind kind) noexcept {
  switch (kind) {
    case InlineSubKind::ExampleCode: return "example-code";
    case InlineSubKind::Documentation: return "documentation";
    case InlineSubKind::AskQuestion: return "ask-question";
  }
  return "unknown";
}

std::optional<FeatureKind> parse_feature(std::string_view id) noexcept {
  for (auto kind : kAllFeatures) {
    if (to_string(kind) == id) return kind;
  }
  return std::nullopt;
}

std::optional<InlineSubKind> parse_inline_subkind(std::string_view id) noexcept {
  for (auto kind : {InlineSubKind::ExampleCode, InlineSubKind::Documentation,
                    InlineSubKind::AskQuestion}) {
    if (to_string(kind) == id) return kind;
  }
  return std::nullopt;
}

std::string_view display_name(FeatureKind kind) noexcept {
  switch (kind) {
    case FeatureKind::GeneralQuestion: return "General Question";
    case FeatureKind::QuestionFromCode: return "Question from Code";
    case FeatureKind::ExplainCode: return "Explain Code";
    case FeatureKind::HelpFixCode: return "Help Fix Code";
    case FeatureKind::HelpWriteCode: return "Help Write Code";
    case FeatureKind::InlineExploration: return "Inline Code Exploration";
    case FeatureKind::FollowUp: return "Follow-up";
  }
  return "Unknown";
}

bool supports_followup(FeatureKind kind) noexcept {
  switch (kind) {
    case FeatureKind::GeneralQuestion:
    case FeatureKind::QuestionFromCode:
    case FeatureKind::ExplainCode:
    case FeatureKind::HelpWriteCode:
    case FeatureKind::FollowUp:
      return true;
    case FeatureKind::HelpFixCode:
    case FeatureKind::InlineExploration:
      return false;
  }
  return false;
}

}  // namespace tutorforge
