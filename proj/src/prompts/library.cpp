#include "tutorforge/prompts/library.hpp"

#include <json.hpp>

#include <algorithm>

#include "tutorforge/core/error.hpp"
#include "tutorforge/core/text.hpp"

namespace tutorforge::prompts {

using nlohmann::json;

const char* const kRelevanceGuard =
    "Only help with C programming and the exercises of this course. If the student's query is "
    "not about programming, answer with the refusal section alone and leave every other "
    "section out.";

namespace {

std::string strip_trailing_newlines(std::string value) {
  while (!value.empty() && (value.back() == '\n' || value.back() == '\r')) value.pop_back();
  return value;
}

bool present(const std::optional<std::string>& v) {
  return v && !text::trim(*v).empty();
}

}  // namespace

PromptLibrary::PromptLibrary(std::map<std::string, PromptTemplate> templates,
                             markup::MarkupGrammar grammar, InputLimits limits)
    : templates_(std::move(templates)), grammar_(std::move(grammar)), limits_(limits) {
  grammar_.validate();
}

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir, InputLimits limits) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorCode::ConfigError, "prompt directory not found: " + dir.string());
  }
  std::map<std::string, PromptTemplate> templates;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".prompt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    auto tmpl = load_template(file);
    const auto id = tmpl.id;
    if (!templates.emplace(id, std::move(tmpl)).second) {
      throw Error(ErrorCode::TemplateError, "duplicate template id '" + id + "'");
    }
  }
  const auto grammar_file = dir / "grammar.json";
  auto grammar = std::filesystem::exists(grammar_file)
                     ? grammar_from_json(text::read_file(grammar_file))
                     : markup::default_grammar();
  return PromptLibrary(std::move(templates), std::move(grammar), limits);
}

const PromptTemplate& PromptLibrary::get(const std::string& id) const {
  const auto it = templates_.find(id);
  if (it == templates_.end()) throw Error(ErrorCode::TemplateError, "no template '" + id + "'");
  return it->second;
}

std::string PromptLibrary::template_id(FeatureKind feature, std::optional<InlineSubKind> subkind) {
  if (feature == FeatureKind::InlineExploration) {
    return "inline-" + std::string(to_string(subkind.value_or(InlineSubKind::AskQuestion)));
  }
  return std::string(to_string(feature));
}

void PromptLibrary::check_code(const std::string& code) const {
  const auto lines = text::split_lines(code).size();
  if (lines > limits_.code_lines) {
    throw Error(ErrorCode::SlotTooLong, "code has " + std::to_string(lines) +
                                            " lines; the limit is " +
                                            std::to_string(limits_.code_lines));
  }
}

void PromptLibrary::check_text(const std::string& slot, const std::string& value) const {
  if (value.size() > limits_.question_chars) {
    throw Error(ErrorCode::SlotTooLong, slot + " has " + std::to_string(value.size()) +
                                            " characters; the limit is " +
                                            std::to_string(limits_.question_chars));
  }
}

PromptText PromptLibrary::render(const PromptTemplate& tmpl,
                                 const std::map<std::string, std::string>& slots,
                                 bool with_relevance_guard) const {
  std::map<std::string, std::string> values;
  for (const auto& name : tmpl.input_slots) {
    const auto it = slots.find(name);
    if (it == slots.end() || text::trim(it->second).empty()) {
      throw Error(ErrorCode::MissingSlot, "template '" + tmpl.id + "' needs slot '" + name + "'");
    }
    values[name] = strip_trailing_newlines(it->second);
  }
  std::string out = tmpl.preamble;
  if (with_relevance_guard) {
    out += kRelevanceGuard;
    out += '\n';
  }
  for (const auto& pair : tmpl.few_shot_pairs) {
    out += '\n';
    out += pair.input;
    out += pair.output;
  }
  out += '\n';
  out += fill_slots(tmpl.input_template, values);
  return {std::move(out), tmpl.expected_sections, tmpl.stop_tokens};
}

PromptText PromptLibrary::build_feature_prompt(FeatureKind feature, const FeatureInputs& inputs,
                                               std::optional<InlineSubKind> subkind) const {
  std::map<std::string, std::string> slots;
  if (present(inputs.question)) {
    check_text("question", *inputs.question);
    slots["question"] = *inputs.question;
  }
  if (present(inputs.code)) {
    check_code(*inputs.code);
    slots["code"] = *inputs.code;
  }
  if (present(inputs.intended_behavior)) {
    check_text("intended behavior", *inputs.intended_behavior);
    slots["intended_behavior"] = *inputs.intended_behavior;
  }
  if (present(inputs.prior_exchange)) slots["prior_exchange"] = *inputs.prior_exchange;
  return render(get(template_id(feature, subkind)), slots, true);
}

PromptText PromptLibrary::build_pseudocode_prompt(const std::string& code) const {
  if (!text::trim(code).empty()) check_code(code);
  return render(get("pseudocode"), {{"code", code}}, false);
}

PromptText PromptLibrary::build_fix_prompt(const std::string& buggy_code,
                                           const std::string& intent) const {
  FeatureInputs inputs;
  inputs.code = buggy_code;
  inputs.intended_behavior = intent;
  return build_feature_prompt(FeatureKind::HelpFixCode, inputs);
}

PromptText PromptLibrary::build_annotation_explanation_prompt(
    const std::string& annotated_listing, const std::vector<LabelSite>& sites,
    const std::string& fixed_code) const {
  if (sites.empty()) throw Error(ErrorCode::NoLabels, "no labeled lines to explain");
  std::string list;
  for (const auto& site : sites) {
    list += site.id + " (" + site.kind + ", " + site.where + ")";
    if (!site.text.empty()) list += ": " + site.text;
    list += '\n';
  }
  return render(get("annotation-explanations"),
                {{"annotated", annotated_listing}, {"labels", list}, {"fixed", fixed_code}},
                false);
}

PromptText PromptLibrary::build_followup_suggestion_prompt(const std::string& exchange) const {
  return render(get("followup-suggestions"), {{"prior_exchange", exchange}}, false);
}

std::string grammar_to_json(const markup::MarkupGrammar& grammar) {
  json single = json::object();
  for (const auto& [id, marker] : grammar.single_line_sections) single[id] = marker;
  json blocks = json::object();
  for (const auto& [id, tokens] : grammar.block_sections) {
    blocks[id] = {{"begin", tokens.begin},
                  {"end", tokens.end},
                  {"plain", grammar.plain_blocks.count(id) > 0}};
  }
  json out{{"single_line", single},
           {"blocks", blocks},
           {"separator", grammar.line_explanation_separator},
           {"keyword_delimiter", std::string(1, grammar.keyword_delimiter)}};
  return out.dump(2) + "\n";
}

markup::MarkupGrammar grammar_from_json(const std::string& json_text) {
  markup::MarkupGrammar grammar;
  try {
    const auto doc = json::parse(json_text);
    for (const auto& [id, marker] : doc.at("single_line").items()) {
      grammar.single_line_sections[id] = marker.get<std::string>();
    }
    for (const auto& [id, tokens] : doc.at("blocks").items()) {
      grammar.block_sections[id] = {tokens.at("begin").get<std::string>(),
                                    tokens.at("end").get<std::string>()};
      if (tokens.value("plain", false)) grammar.plain_blocks.insert(id);
    }
    grammar.line_explanation_separator = doc.value("separator", std::string("///"));
    const auto delim = doc.value("keyword_delimiter", std::string("`"));
    if (delim.size() != 1) throw Error(ErrorCode::AmbiguousGrammar, "keyword delimiter must be one character");
    grammar.keyword_delimiter = delim[0];
  } catch (const json::exception& e) {
    throw Error(ErrorCode::TemplateError, std::string("grammar.json: ") + e.what());
  }
  grammar.validate();
  return grammar;
}

}  // namespace tutorforge::prompts
