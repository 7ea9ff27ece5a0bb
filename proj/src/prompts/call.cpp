#include "tutorforge/prompts/call.hpp"

#include "tutorforge/core/text.hpp"
#include "tutorforge/markup/parser.hpp"

namespace tutorforge::prompts {

CallResult run_prompt(const gateway::Provider& provider, const PromptText& prompt,
                      const markup::MarkupGrammar& grammar, const EventHandler& on_event,
                      std::optional<int> max_output_tokens) {
  gateway::CompletionRequest request;
  request.prompt = prompt.rendered;
  request.stop_tokens = prompt.stop_tokens;
  request.max_output_tokens = max_output_tokens;
  markup::StreamParser parser(grammar, prompt.expected_sections);
  const auto result = gateway::complete(provider, request, [&](const gateway::CompletionChunk& c) {
    for (const auto& event : parser.feed(c.text)) on_event(event);
    return true;
  });
  for (const auto& event : parser.finalize()) on_event(event);
  return {result.text, result.finish};
}

std::vector<std::string> suggest_followups(const PromptLibrary& library,
                                           const gateway::Provider& provider,
                                           const std::string& exchange,
                                           const EventHandler& on_event,
                                           std::optional<int> max_output_tokens) {
  std::vector<std::string> suggestions;
  run_prompt(
      provider, library.build_followup_suggestion_prompt(exchange), library.grammar(),
      [&](const markup::StreamEvent& event) {
        if (on_event) on_event(event);
        const auto* line = std::get_if<markup::LineCompleted>(&event);
        if (!line || line->section != "suggestions") return;
        std::string text(text::trim(line->visible));
        if (line->explanation && !line->explanation->empty()) {
          text += " " + *line->explanation;
        }
        if (!text.empty() && suggestions.size() < kMaxSuggestions) {
          suggestions.push_back(std::move(text));
        }
      },
      max_output_tokens);
  return suggestions;
}

}  // namespace tutorforge::prompts
