#include "tutorforge/scaffold/docstore.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <json.hpp>
#include <set>

#include "tutorforge/core/error.hpp"
#include "tutorforge/core/text.hpp"

namespace tutorforge::scaffold {

using nlohmann::json;

namespace {

json to_json(const FunctionDoc& doc) {
  return {{"name", doc.name},
          {"summary", doc.summary},
          {"description", doc.description},
          {"example_code", doc.example_code},
          {"similar_functions", doc.similar_functions}};
}

// Throws json exceptions on shape errors; callers translate.
FunctionDoc doc_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("expected an object");
  static const std::set<std::string> known{"name", "summary", "description", "example_code",
                                           "similar_functions"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw std::invalid_argument("unknown field '" + key + "'");
  }
  FunctionDoc doc;
  doc.name = j.at("name").get<std::string>();
  doc.summary = j.at("summary").get<std::string>();
  doc.description = j.at("description").get<std::string>();
  doc.example_code = j.at("example_code").get<std::string>();
  if (j.contains("similar_functions")) {
    doc.similar_functions = j.at("similar_functions").get<std::vector<std::string>>();
  }
  return doc;
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
}

[[noreturn]] void corpus_error(const std::filesystem::path& file, std::size_t line,
                               const std::string& what) {
  throw Error(ErrorCode::CorpusParseError,
              file.filename().string() + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

void validate(const FunctionDoc& doc) {
  const auto check = [&](const std::string& value, const char* field) {
    if (text::trim(value).empty()) {
      throw Error(ErrorCode::InvalidDoc,
                  "doc '" + doc.name + "' has an empty " + std::string(field));
    }
  };
  check(doc.name, "name");
  check(doc.summary, "summary");
  check(doc.description, "description");
  check(doc.example_code, "example_code");
  for (const auto& s : doc.similar_functions) check(s, "similar function name");
}

DocStore::DocStore(std::vector<FunctionDoc> docs, std::string source_manifest)
    : manifest_(std::move(source_manifest)) {
  for (auto& doc : docs) {
    validate(doc);
    const auto name = doc.name;
    if (!entries_.emplace(name, std::move(doc)).second) {
      throw Error(ErrorCode::DuplicateFunctionName, "function '" + name + "' documented twice");
    }
  }
}

const FunctionDoc* DocStore::find(const std::string& name) const {
  const auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : &it->second;
}

std::string DocStore::to_json_text() const {
  json functions = json::array();
  for (const auto& [name, doc] : entries_) functions.push_back(to_json(doc));
  return json{{"manifest", manifest_}, {"functions", functions}}.dump(2) + "\n";
}

DocStore DocStore::from_json_text(const std::string& text) {
  std::vector<FunctionDoc> docs;
  std::string manifest;
  try {
    const auto j = json::parse(text);
    manifest = j.at("manifest").get<std::string>();
    for (const auto& entry : j.at("functions")) docs.push_back(doc_from_json(entry));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidDoc, std::string("malformed doc store: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorCode::InvalidDoc, std::string("malformed doc store: ") + e.what());
  }
  return DocStore(std::move(docs), std::move(manifest));
}

DocStore build_docstore(const std::filesystem::path& corpus_dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(corpus_dir, ec)) {
    throw Error(ErrorCode::IoError, "corpus directory not found: " + corpus_dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(corpus_dir)) {
    if (entry.path().extension() == ".json" && entry.path().filename() != "manifest.json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  std::string manifest;
  const auto manifest_file = corpus_dir / "manifest.json";
  if (std::filesystem::exists(manifest_file)) {
    const auto content = text::read_file(manifest_file);
    try {
      manifest = json::parse(content).dump();
    } catch (const json::parse_error& e) {
      corpus_error(manifest_file, line_of(content, e.byte), e.what());
    }
  } else {
    throw Error(ErrorCode::CorpusParseError, "manifest.json:0: missing manifest");
  }

  std::vector<FunctionDoc> docs;
  std::map<std::string, std::filesystem::path> origin;
  for (const auto& file : files) {
    const auto content = text::read_file(file);
    json j;
    try {
      j = json::parse(content);
    } catch (const json::parse_error& e) {
      corpus_error(file, line_of(content, e.byte == 0 ? 0 : e.byte - 1), e.what());
    }
    FunctionDoc doc;
    try {
      doc = doc_from_json(j);
      validate(doc);
    } catch (const json::exception& e) {
      corpus_error(file, 1, e.what());
    } catch (const std::invalid_argument& e) {
      corpus_error(file, 1, e.what());
    } catch (const Error& e) {
      corpus_error(file, 1, e.what());
    }
    if (const auto [it, fresh] = origin.emplace(doc.name, file); !fresh) {
      throw Error(ErrorCode::DuplicateFunctionName,
                  "function '" + doc.name + "' documented in both " +
                      it->second.filename().string() + " and " + file.filename().string());
    }
    docs.push_back(std::move(doc));
  }
  return DocStore(std::move(docs), std::move(manifest));
}

DocStore load_docstore(const std::filesystem::path& store_file) {
  return DocStore::from_json_text(text::read_file(store_file));
}

void save_docstore(const DocStore& store, const std::filesystem::path& store_file) {
  text::write_file(store_file, store.to_json_text());
}

std::vector<FunctionDoc> lookup_docs(const DocStore& store, const std::vector<std::string>& names) {
  std::vector<FunctionDoc> out;
  std::set<std::string> seen;
  for (const auto& name : names) {
    if (!seen.insert(name).second) continue;
    if (const auto* doc = store.find(name)) {
      out.push_back(*doc);
    } else {
      spdlog::debug("no documentation for '{}'", name);
    }
  }
  return out;
}

}  // namespace tutorforge::scaffold
