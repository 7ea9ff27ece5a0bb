#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tutorforge::scaffold {

struct FunctionDoc {
  std::string name;
  std::string summary;
  std::string description;
  std::string example_code;
  std::vector<std::string> similar_functions;
  bool operator==(const FunctionDoc&) const = default;
};

/// Throws Error(InvalidDoc) naming the first empty required field.
void validate(const FunctionDoc& doc);

/// Static documentation keyed by function name. Immutable once built.
class DocStore {
 public:
  DocStore() = default;
  /// Errors: InvalidDoc, DuplicateFunctionName.
  DocStore(std::vector<FunctionDoc> docs, std::string source_manifest);

  [[nodiscard]] const FunctionDoc* find(const std::string& name) const;
  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
  [[nodiscard]] const std::map<std::string, FunctionDoc>& entries() const noexcept {
    return entries_;
  }
  [[nodiscard]] const std::string& source_manifest() const noexcept { return manifest_; }

  /// Canonical single-file form; entries sorted by name.
  [[nodiscard]] std::string to_json_text() const;
  static DocStore from_json_text(const std::string& text);

  bool operator==(const DocStore&) const = default;

 private:
  std::map<std::string, FunctionDoc> entries_;
  std::string manifest_;
};

/// Reads a corpus directory: one JSON object per function in `*.json` plus
/// `manifest.json` describing where the text came from.
/// Errors: CorpusParseError ("file:line: reason"), DuplicateFunctionName.
DocStore build_docstore(const std::filesystem::path& corpus_dir);
DocStore load_docstore(const std::filesystem::path& store_file);
void save_docstore(const DocStore& store, const std::filesystem::path& store_file);

/// Order-preserving and deduplicated; unknown names are skipped and logged.
std::vector<FunctionDoc> lookup_docs(const DocStore& store, const std::vector<std::string>& names);

}  // namespace tutorforge::scaffold
