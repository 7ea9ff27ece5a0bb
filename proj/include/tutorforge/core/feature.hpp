#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace tutorforge {

enum class FeatureKind {
  GeneralQuestion,
  QuestionFromCode,
  ExplainCode,
  HelpFixCode,
  HelpWriteCode,
  InlineExploration,
  FollowUp,
};

/// What a hover exploration on a keyword asks for.
enum class InlineSubKind { ExampleCode, Documentation, AskQuestion };

inline constexpr FeatureKind kAllFeatures[] = {
    FeatureKind::GeneralQuestion, FeatureKind::QuestionFromCode,
    FeatureKind::ExplainCode,     FeatureKind::HelpFixCode,
    FeatureKind::HelpWriteCode,   FeatureKind::InlineExploration,
    FeatureKind::FollowUp,
};

/// Stable wire identifier, e.g. "general-question".
std::string_view to_string(FeatureKind kind) noexcept;
std::string_view to_string(InlineSubKind kind) noexcept;
std::optional<FeatureKind> parse_feature(std::string_view id) noexcept;
std::optional<InlineSubKind> parse_inline_subkind(std::string_view id) noexcept;

/// Human-readable label as shown in reports ("General Question").
std::string_view display_name(FeatureKind kind) noexcept;

/// Features whose responses accept follow-up questions.
bool supports_followup(FeatureKind kind) noexcept;

}  // namespace tutorforge
