#include "tutorforge/core/error.hpp"

namespace tutorforge {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ProviderUnreachable: return "ProviderUnreachable";
    case ErrorCode::ProviderRefused: return "ProviderRefused";
    case ErrorCode::StreamAborted: return "StreamAborted";
    case ErrorCode::MalformedProviderResponse: return "MalformedProviderResponse";
    case ErrorCode::UnknownPrompt: return "UnknownPrompt";
    case ErrorCode::InvalidRequest: return "InvalidRequest";
    case ErrorCode::InvalidScript: return "InvalidScript";
    case ErrorCode::AmbiguousGrammar: return "AmbiguousGrammar";
    case ErrorCode::MissingSlot: return "MissingSlot";
    case ErrorCode::SlotTooLong: return "SlotTooLong";
    case ErrorCode::NoLabels: return "NoLabels";
    case ErrorCode::TemplateError: return "TemplateError";
    case ErrorCode::GuardrailViolation: return "GuardrailViolation";
    case ErrorCode::EmptyTransform: return "EmptyTransform";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::CorpusParseError: return "CorpusParseError";
    case ErrorCode::DuplicateFunctionName: return "DuplicateFunctionName";
    case ErrorCode::InvalidDoc: return "InvalidDoc";
    case ErrorCode::Unauthorized: return "Unauthorized";
    case ErrorCode::RatingRequired: return "RatingRequired";
    case ErrorCode::InvalidInputCombination: return "InvalidInputCombination";
    case ErrorCode::InputTooLong: return "InputTooLong";
    case ErrorCode::Throttled: return "Throttled";
    case ErrorCode::AlreadyRated: return "AlreadyRated";
    case ErrorCode::UnknownResponse: return "UnknownResponse";
    case ErrorCode::StarsOutOfRange: return "StarsOutOfRange";
    case ErrorCode::FollowUpUnsupported: return "FollowUpUnsupported";
    case ErrorCode::OffTopicRefused: return "OffTopicRefused";
    case ErrorCode::Forbidden: return "Forbidden";
    case ErrorCode::DenominatorZero: return "DenominatorZero";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace tutorforge
