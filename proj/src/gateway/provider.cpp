#include "tutorforge/gateway/provider.hpp"

#include <algorithm>

namespace tutorforge::gateway {

void CompletionRequest::validate() const {
  if (prompt.empty()) throw Error(ErrorCode::InvalidRequest, "empty prompt");
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw Error(ErrorCode::InvalidRequest, "temperature outside [0, 2]");
  }
  if (max_output_tokens && *max_output_tokens <= 0) {
    throw Error(ErrorCode::InvalidRequest, "max_output_tokens must be positive");
  }
  const bool has_stop = std::any_of(stop_tokens.begin(), stop_tokens.end(),
                                    [](const std::string& s) { return !s.empty(); });
  if (!has_stop && !max_output_tokens) {
    throw Error(ErrorCode::InvalidRequest, "request needs a stop token or a token bound");
  }
  if (std::any_of(stop_tokens.begin(), stop_tokens.end(),
                  [](const std::string& s) { return s.empty(); })) {
    throw Error(ErrorCode::InvalidRequest, "empty stop token");
  }
}

namespace {

// Holds back the most recent piece so the last one can be flagged final.
class ChunkForwarder {
 public:
  explicit ChunkForwarder(const ChunkSink& sink) : sink_(sink) {}

  void push(std::string piece) {
    if (piece.empty()) return;
    if (held_) deliver(CompletionChunk{std::move(*held_), false});
    held_ = std::move(piece);
  }

  void finish() { deliver(CompletionChunk{held_ ? std::move(*held_) : std::string{}, true}); }

  [[nodiscard]] const std::string& delivered() const noexcept { return delivered_; }
  [[nodiscard]] bool cancelled() const noexcept { return cancelled_; }

 private:
  void deliver(CompletionChunk chunk) {
    if (cancelled_) return;
    delivered_ += chunk.text;
    if (!sink_(chunk)) cancelled_ = true;
  }

  const ChunkSink& sink_;
  std::optional<std::string> held_;
  std::string delivered_;
  bool cancelled_ = false;
};

// Length of the longest suffix of `text` that is a proper prefix of a stop token.
std::size_t partial_stop_suffix(std::string_view text, const std::vector<std::string>& stops) {
  std::size_t best = 0;
  for (const auto& stop : stops) {
    const auto max_len = std::min(text.size(), stop.size() - 1);
    for (std::size_t len = max_len; len > best; --len) {
      if (text.substr(text.size() - len) == std::string_view(stop).substr(0, len)) {
        best = len;
        break;
      }
    }
  }
  return best;
}

}  // namespace

CompletionResult complete(const Provider& provider, const CompletionRequest& request,
                          const ChunkSink& sink) {
  request.validate();
  ChunkForwarder forward(sink);
  std::string pending;
  bool stopped = false;

  const auto on_fragment = [&](std::string_view fragment) -> bool {
    if (stopped || forward.cancelled()) return false;
    pending.append(fragment);
    std::size_t cut = std::string::npos;
    for (const auto& stop : request.stop_tokens) {
      cut = std::min(cut, pending.find(stop));
    }
    if (cut != std::string::npos) {
      forward.push(pending.substr(0, cut));
      pending.clear();
      stopped = true;
      return false;
    }
    const auto keep = partial_stop_suffix(pending, request.stop_tokens);
    forward.push(pending.substr(0, pending.size() - keep));
    pending.erase(0, pending.size() - keep);
    return !forward.cancelled();
  };

  FinishReason finish = provider.generate(request, on_fragment);
  if (stopped) {
    finish = FinishReason::Stop;
  } else {
    forward.push(std::move(pending));
  }
  if (!forward.cancelled()) forward.finish();
  if (forward.cancelled()) {
    throw ProviderError(ErrorCode::StreamAborted, "stream cancelled by consumer", 0, {},
                        forward.delivered());
  }
  return CompletionResult{forward.delivered(), finish};
}

CompletionResult complete(const Provider& provider, const CompletionRequest& request) {
  return complete(provider, request, [](const CompletionChunk&) { return true; });
}

}  // namespace tutorforge::gateway
