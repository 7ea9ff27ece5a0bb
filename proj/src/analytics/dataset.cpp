#include "tutorforge/analytics/dataset.hpp"

#include <openssl/evp.h>

#include "tutorforge/core/error.hpp"
#include "tutorforge/core/text.hpp"

namespace tutorforge::analytics {

using nlohmann::json;

std::string pseudonymize(std::string_view user, std::string_view salt) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  const bool ok = ctx && EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, salt.data(), salt.size()) == 1 &&
                  EVP_DigestUpdate(ctx, user.data(), user.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &length) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw Error(ErrorCode::IoError, "SHA-256 unavailable");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out = "u-";
  for (unsigned int i = 0; i < 8; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::vector<records::UsageRecord> anonymized(const std::vector<records::UsageRecord>& records,
                                             const ExportPolicy& policy) {
  auto out = records;
  for (auto& r : out) {
    r.query.user = policy.redaction == Redaction::Pseudonymize ? pseudonymize(r.query.user, policy.salt)
                                                               : std::string();
  }
  return out;
}

std::string export_dataset(const std::vector<records::UsageRecord>& records,
                           const ExportPolicy& policy) {
  std::string out;
  for (const auto& r : anonymized(records, policy)) {
    auto j = to_json(r);
    if (policy.redaction == Redaction::DropUser) j["query"].erase("user");
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<records::UsageRecord> import_dataset(std::string_view text) {
  std::vector<records::UsageRecord> out;
  std::size_t line_no = 0;
  for (const auto& line : text::split_lines(text)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(records::usage_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::InvalidRequest,
                  "dataset line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace tutorforge::analytics
