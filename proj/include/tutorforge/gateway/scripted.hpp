#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "tutorforge/gateway/provider.hpp"

namespace tutorforge::gateway {

/// A pre-recorded completion and the offsets at which it is split into chunks.
struct ScriptEntry {
  std::string completion;
  std::vector<std::size_t> splits;

  /// Offsets must be strictly increasing and inside (0, completion.size()).
  void validate() const;
  bool operator==(const ScriptEntry&) const = default;
};

/// Completions keyed by the exact prompt text.
class ScriptTable {
 public:
  void add(std::string prompt, ScriptEntry entry);
  [[nodiscard]] const ScriptEntry* find(const std::string& prompt) const;
  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
  [[nodiscard]] const std::map<std::string, ScriptEntry>& entries() const noexcept {
    return entries_;
  }

  /// JSON array of {prompt, completion, splits}.
  static ScriptTable from_json_text(const std::string& json_text);
  static ScriptTable load(const std::filesystem::path& path);
  [[nodiscard]] std::string to_json_text() const;

 private:
  std::map<std::string, ScriptEntry> entries_;
};

/// Cuts `text` after `max_tokens` whitespace-delimited tokens. A token is a
/// run of non-whitespace together with the whitespace before it.
std::size_t token_cut(std::string_view text, int max_tokens);

/// Splits scripted text at the given offsets.
std::vector<std::string> chunk_text(std::string_view text, const std::vector<std::size_t>& splits);

/// Deterministic provider backed by a ScriptTable. Throws
/// ProviderError(UnknownPrompt) for prompts missing from the table.
class ScriptedProvider final : public Provider {
 public:
  explicit ScriptedProvider(ScriptTable table);

  FinishReason generate(const CompletionRequest& request, const FragmentSink& emit) const override;
  [[nodiscard]] std::string name() const override { return "scripted"; }
  [[nodiscard]] const ScriptTable& table() const noexcept { return table_; }

 private:
  ScriptTable table_;
};

std::shared_ptr<const Provider> scripted_provider(ScriptTable table);

/// Serves queued entries in call order regardless of prompt, recording each
/// prompt it saw. Used to author script tables for golden transcripts.
class SequentialProvider final : public Provider {
 public:
  explicit SequentialProvider(std::vector<ScriptEntry> queue);

  FinishReason generate(const CompletionRequest& request, const FragmentSink& emit) const override;
  [[nodiscard]] std::string name() const override { return "sequential"; }

  /// Table mapping every prompt served so far to the entry it received.
  [[nodiscard]] ScriptTable recorded() const;
  [[nodiscard]] std::size_t remaining() const;

 private:
  mutable std::mutex mutex_;
  std::vector<ScriptEntry> queue_;
  mutable std::size_t next_ = 0;
  mutable std::vector<std::pair<std::string, ScriptEntry>> served_;
};

}  // namespace tutorforge::gateway
