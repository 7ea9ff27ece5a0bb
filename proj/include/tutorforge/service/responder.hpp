#pragma once

#include <functional>
#include <optional>
#include <string>

#include "tutorforge/gateway/provider.hpp"
#include "tutorforge/prompts/library.hpp"
#include "tutorforge/records/usage.hpp"
#include "tutorforge/records/wire.hpp"
#include "tutorforge/scaffold/docstore.hpp"

namespace tutorforge::service {

using WireSink = std::function<void(const records::WireEvent&)>;

struct GenerationContext {
  const prompts::PromptLibrary& library;
  const gateway::Provider& provider;
  const scaffold::DocStore& docs;
  std::optional<int> max_output_tokens;
};

inline constexpr const char* kOffTopicRefusal =
    "This question does not look related to the programming course, so it was not answered.";
inline constexpr const char* kWithheldRefusal =
    "The generated response revealed corrected code and was withheld. Try asking about one "
    "specific line or error message instead.";

/// Parent input and rendered answer, quoted into follow-up prompts.
std::string exchange_text(const records::Query& query, const records::ResponseDocument& doc);

/// Runs the pipeline of `query.feature` and streams the response: the
/// ResponseStarted envelope, the disclaimer, then content as it is decided.
/// The returned document is built from the pipeline results, not from the
/// wire; ResponseCompleted is left to the caller. `prior_exchange` is the
/// parent exchange for follow-ups and inline explorations.
/// Errors: provider errors, EmptyInput, EmptyTransform and prompt errors.
records::ResponseDocument generate_response(const GenerationContext& context,
                                            const records::Query& query,
                                            const std::string& response_id,
                                            const std::optional<std::string>& prior_exchange,
                                            const WireSink& sink);

}  // namespace tutorforge::service
