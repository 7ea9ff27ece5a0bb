#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tutorforge/core/error.hpp"

namespace tutorforge::gateway {

struct CompletionRequest {
  std::string prompt;
  std::vector<std::string> stop_tokens;
  std::optional<int> max_output_tokens;
  double temperature = 0.0;

  /// Throws Error(InvalidRequest) when the prompt is empty, the temperature is
  /// outside [0, 2], a bound is non-positive, or neither a stop token nor a
  /// token bound is present.
  void validate() const;
};

struct CompletionChunk {
  std::string text;
  bool is_final = false;
  bool operator==(const CompletionChunk&) const = default;
};

enum class FinishReason { Stop, Length };

struct CompletionResult {
  std::string text;
  FinishReason finish = FinishReason::Stop;
};

/// Returns false to cancel the stream.
using ChunkSink = std::function<bool(const CompletionChunk&)>;

/// Raw fragment callback used by providers. Returning false asks the provider
/// to stop generating.
using FragmentSink = std::function<bool(std::string_view)>;

/// Failure raised by providers and by complete().
class ProviderError : public Error {
 public:
  ProviderError(ErrorCode code, const std::string& message, int status = 0,
                std::string body = {}, std::string partial_text = {})
      : Error(code, message),
        status_(status),
        body_(std::move(body)),
        partial_text_(std::move(partial_text)) {}

  /// HTTP status for ProviderRefused, 0 otherwise.
  [[nodiscard]] int status() const noexcept { return status_; }
  [[nodiscard]] const std::string& body() const noexcept { return body_; }
  /// Text already delivered before a StreamAborted.
  [[nodiscard]] const std::string& partial_text() const noexcept { return partial_text_; }

 private:
  int status_;
  std::string body_;
  std::string partial_text_;
};

/// A text-completion backend. Implementations must be safe to share across
/// threads; each call owns its sink.
class Provider {
 public:
  virtual ~Provider() = default;

  /// Streams generated text in order. Returns how generation ended; returns
  /// early (with any reason) once `emit` reports false.
  virtual FinishReason generate(const CompletionRequest& request,
                                const FragmentSink& emit) const = 0;

  [[nodiscard]] virtual std::string name() const = 0;
};

/// Runs one completion. Chunks reach `sink` in order, the last one flagged
/// final, and their concatenation equals the returned text. Output halts at
/// the first stop token (excluded) or at the provider's token bound.
CompletionResult complete(const Provider& provider, const CompletionRequest& request,
                          const ChunkSink& sink);

/// complete() with a sink that accepts everything.
CompletionResult complete(const Provider& provider, const CompletionRequest& request);

}  // namespace tutorforge::gateway
