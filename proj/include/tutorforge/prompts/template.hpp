#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tutorforge/core/feature.hpp"

namespace tutorforge::prompts {

struct FewShotPair {
  std::string input;
  std::string output;
};

/// A few-shot prompt as stored on disk.
///
/// File layout: a YAML front-matter block delimited by "---" lines carrying
/// `id`, optional `feature` / `subkind`, `stop` and `sections`, followed by
/// body blocks introduced by `[[preamble]]`, `[[example-input]]`,
/// `[[example-output]]` (repeatable, in pairs) and `[[input]]`. The input
/// block names its slots as `{{slot}}`.
struct PromptTemplate {
  std::string id;
  std::optional<FeatureKind> feature;
  std::optional<InlineSubKind> subkind;
  std::string preamble;
  std::vector<FewShotPair> few_shot_pairs;
  std::string input_template;
  std::vector<std::string> input_slots;  // in order of appearance
  std::vector<std::string> stop_tokens;
  std::vector<std::string> expected_sections;
};

/// Throws Error(TemplateError) with the source name on malformed text.
PromptTemplate parse_template(const std::string& source_text, const std::string& source_name);
PromptTemplate load_template(const std::filesystem::path& path);

/// Replaces each `{{slot}}` in one pass; inserted values are not rescanned.
std::string fill_slots(const std::string& input_template,
                       const std::map<std::string, std::string>& values);

}  // namespace tutorforge::prompts
