#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tutorforge {

enum class ErrorCode {
  // llm-gateway
  ProviderUnreachable,
  ProviderRefused,
  StreamAborted,
  MalformedProviderResponse,
  UnknownPrompt,
  InvalidRequest,
  InvalidScript,
  // stream-markup
  AmbiguousGrammar,
  // prompt-library
  MissingSlot,
  SlotTooLong,
  NoLabels,
  TemplateError,
  // fix-annotator / scaffold
  GuardrailViolation,
  EmptyTransform,
  EmptyInput,
  CorpusParseError,
  DuplicateFunctionName,
  InvalidDoc,
  // tutor-service
  Unauthorized,
  RatingRequired,
  InvalidInputCombination,
  InputTooLong,
  Throttled,
  AlreadyRated,
  UnknownResponse,
  StarsOutOfRange,
  FollowUpUnsupported,
  OffTopicRefused,
  Forbidden,
  // analytics
  DenominatorZero,
  LengthMismatch,
  // plumbing
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tutorforge
