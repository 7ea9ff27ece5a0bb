#pragma once

#include <functional>
#include <optional>

#include "tutorforge/gateway/provider.hpp"
#include "tutorforge/markup/events.hpp"
#include "tutorforge/markup/grammar.hpp"
#include "tutorforge/prompts/library.hpp"

namespace tutorforge::prompts {

using EventHandler = std::function<void(const markup::StreamEvent&)>;

struct CallResult {
  std::string text;
  gateway::FinishReason finish = gateway::FinishReason::Stop;
};

/// Sends `prompt` to the provider and feeds every chunk through a stream
/// parser; each parser event reaches `on_event` as soon as it is decided.
CallResult run_prompt(const gateway::Provider& provider, const PromptText& prompt,
                      const markup::MarkupGrammar& grammar, const EventHandler& on_event,
                      std::optional<int> max_output_tokens = {});

}  // namespace tutorforge::prompts

namespace tutorforge::prompts {

/// Runs the follow-up suggestion prompt and keeps at most kMaxSuggestions
/// non-empty lines of its suggestions block.
std::vector<std::string> suggest_followups(const PromptLibrary& library,
                                           const gateway::Provider& provider,
                                           const std::string& exchange,
                                           const EventHandler& on_event = {},
                                           std::optional<int> max_output_tokens = {});

}  // namespace tutorforge::prompts
