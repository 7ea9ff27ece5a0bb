#include "tutorforge/gateway/scripted.hpp"

#include <json.hpp>

#include "tutorforge/core/text.hpp"

namespace tutorforge::gateway {

using nlohmann::json;

void ScriptEntry::validate() const {
  std::size_t prev = 0;
  for (auto s : splits) {
    if (s <= prev || s >= completion.size()) {
      throw Error(ErrorCode::InvalidScript, "split offsets must be strictly increasing and "
                                            "inside the completion text");
    }
    prev = s;
  }
}

void ScriptTable::add(std::string prompt, ScriptEntry entry) {
  entry.validate();
  if (entries_.count(prompt)) {
    throw Error(ErrorCode::InvalidScript, "duplicate scripted prompt");
  }
  entries_.emplace(std::move(prompt), std::move(entry));
}

const ScriptEntry* ScriptTable::find(const std::string& prompt) const {
  const auto it = entries_.find(prompt);
  return it == entries_.end() ? nullptr : &it->second;
}

ScriptTable ScriptTable::from_json_text(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidScript, std::string("script table: ") + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorCode::InvalidScript, "script table must be an array");
  ScriptTable table;
  for (const auto& item : doc) {
    try {
      ScriptEntry entry{item.at("completion").get<std::string>(),
                        item.value("splits", std::vector<std::size_t>{})};
      table.add(item.at("prompt").get<std::string>(), std::move(entry));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::InvalidScript, std::string("script entry: ") + e.what());
    }
  }
  return table;
}

ScriptTable ScriptTable::load(const std::filesystem::path& path) {
  return from_json_text(text::read_file(path));
}

std::string ScriptTable::to_json_text() const {
  json doc = json::array();
  for (const auto& [prompt, entry] : entries_) {
    doc.push_back({{"prompt", prompt}, {"completion", entry.completion}, {"splits", entry.splits}});
  }
  return doc.dump(2) + "\n";
}

std::size_t token_cut(std::string_view text, int max_tokens) {
  std::size_t pos = 0;
  for (int n = 0; n < max_tokens; ++n) {
    while (pos < text.size() && text::is_space(text[pos])) ++pos;
    if (pos == text.size()) return text.size();
    while (pos < text.size() && !text::is_space(text[pos])) ++pos;
  }
  return pos;
}

std::vector<std::string> chunk_text(std::string_view text, const std::vector<std::size_t>& splits) {
  std::vector<std::string> chunks;
  std::size_t start = 0;
  for (auto s : splits) {
    if (s >= text.size()) break;
    chunks.emplace_back(text.substr(start, s - start));
    start = s;
  }
  if (start < text.size() || chunks.empty()) chunks.emplace_back(text.substr(start));
  return chunks;
}

namespace {

FinishReason play(const ScriptEntry& entry, const CompletionRequest& request,
                  const FragmentSink& emit) {
  std::string_view text = entry.completion;
  FinishReason finish = FinishReason::Stop;
  if (request.max_output_tokens) {
    const auto cut = token_cut(text, *request.max_output_tokens);
    if (cut < text.size()) {
      text = text.substr(0, cut);
      finish = FinishReason::Length;
    }
  }
  for (const auto& chunk : chunk_text(text, entry.splits)) {
    if (!emit(chunk)) break;
  }
  return finish;
}

}  // namespace

ScriptedProvider::ScriptedProvider(ScriptTable table) : table_(std::move(table)) {}

FinishReason ScriptedProvider::generate(const CompletionRequest& request,
                                        const FragmentSink& emit) const {
  const auto* entry = table_.find(request.prompt);
  if (!entry) {
    throw ProviderError(ErrorCode::UnknownPrompt,
                        "no scripted completion for prompt beginning \"" +
                            request.prompt.substr(0, 60) + "\"");
  }
  return play(*entry, request, emit);
}

std::shared_ptr<const Provider> scripted_provider(ScriptTable table) {
  return std::make_shared<ScriptedProvider>(std::move(table));
}

SequentialProvider::SequentialProvider(std::vector<ScriptEntry> queue) : queue_(std::move(queue)) {
  for (const auto& e : queue_) e.validate();
}

FinishReason SequentialProvider::generate(const CompletionRequest& request,
                                          const FragmentSink& emit) const {
  ScriptEntry entry;
  {
    std::lock_guard lock(mutex_);
    if (next_ >= queue_.size()) {
      throw ProviderError(ErrorCode::UnknownPrompt, "sequential script exhausted");
    }
    entry = queue_[next_++];
    served_.emplace_back(request.prompt, entry);
  }
  return play(entry, request, emit);
}

ScriptTable SequentialProvider::recorded() const {
  std::lock_guard lock(mutex_);
  ScriptTable table;
  for (const auto& [prompt, entry] : served_) {
    if (const auto* existing = table.find(prompt)) {
      if (!(*existing == entry)) {
        throw Error(ErrorCode::InvalidScript, "same prompt served two different completions");
      }
      continue;
    }
    table.add(prompt, entry);
  }
  return table;
}

std::size_t SequentialProvider::remaining() const {
  std::lock_guard lock(mutex_);
  return queue_.size() - next_;
}

}  // namespace tutorforge::gateway
