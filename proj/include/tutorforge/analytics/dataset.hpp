#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tutorforge/records/usage.hpp"

namespace tutorforge::analytics {

/// Stable pseudonym "u-" + the first 16 hex digits of SHA-256(salt || user).
std::string pseudonymize(std::string_view user, std::string_view salt);

enum class Redaction {
  Pseudonymize,  // users replaced by pseudonyms
  DropUser,      // user field removed
};

struct ExportPolicy {
  Redaction redaction = Redaction::Pseudonymize;
  std::string salt;
};

/// Copies of the records with users rewritten per policy.
std::vector<records::UsageRecord> anonymized(const std::vector<records::UsageRecord>& records,
                                             const ExportPolicy& policy);

/// JSON Lines, one complete record per line. Empty input gives an empty text.
std::string export_dataset(const std::vector<records::UsageRecord>& records,
                           const ExportPolicy& policy);
std::vector<records::UsageRecord> import_dataset(std::string_view text);

}  // namespace tutorforge::analytics
