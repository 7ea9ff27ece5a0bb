#include "tutorforge/prompts/template.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <set>

#include "tutorforge/core/error.hpp"
#include "tutorforge/core/text.hpp"

namespace tutorforge::prompts {

namespace {

[[noreturn]] void fail(const std::string& source, const std::string& what) {
  throw Error(ErrorCode::TemplateError, source + ": " + what);
}

// Drops leading and trailing blank lines but keeps indentation.
std::string block_text(const std::vector<std::string>& lines) {
  std::size_t first = 0;
  std::size_t last = lines.size();
  while (first < last && text::trim(lines[first]).empty()) ++first;
  while (last > first && text::trim(lines[last - 1]).empty()) --last;
  std::string out;
  for (std::size_t i = first; i < last; ++i) {
    out += text::trim_right(lines[i]);
    out += '\n';
  }
  return out;
}

std::vector<std::string> placeholders(const std::string& tmpl) {
  std::vector<std::string> names;
  std::size_t pos = 0;
  while ((pos = tmpl.find("{{", pos)) != std::string::npos) {
    const auto close = tmpl.find("}}", pos + 2);
    if (close == std::string::npos) break;
    names.push_back(tmpl.substr(pos + 2, close - pos - 2));
    pos = close + 2;
  }
  return names;
}

std::vector<std::string> string_list(const YAML::Node& node, const std::string& key,
                                     const std::string& source) {
  std::vector<std::string> out;
  if (!node[key]) return out;
  if (!node[key].IsSequence()) fail(source, "'" + key + "' must be a list");
  for (const auto& item : node[key]) out.push_back(item.as<std::string>());
  return out;
}

}  // namespace

PromptTemplate parse_template(const std::string& source_text, const std::string& source_name) {
  const auto lines = text::split_lines(source_text);
  if (lines.empty() || text::trim(lines[0]) != "---") fail(source_name, "missing front-matter");
  std::size_t close = 1;
  while (close < lines.size() && text::trim(lines[close]) != "---") ++close;
  if (close == lines.size()) fail(source_name, "unterminated front-matter");

  PromptTemplate tmpl;
  YAML::Node meta;
  try {
    meta = YAML::Load(text::join({lines.begin() + 1, lines.begin() + static_cast<long>(close)}, "\n"));
  } catch (const YAML::Exception& e) {
    fail(source_name, std::string("front-matter: ") + e.what());
  }
  if (!meta.IsMap() || !meta["id"]) fail(source_name, "front-matter needs an 'id'");
  try {
    tmpl.id = meta["id"].as<std::string>();
    if (meta["feature"]) {
      const auto f = meta["feature"].as<std::string>();
      tmpl.feature = parse_feature(f);
      if (!tmpl.feature) fail(source_name, "unknown feature '" + f + "'");
    }
    if (meta["subkind"]) {
      const auto s = meta["subkind"].as<std::string>();
      tmpl.subkind = parse_inline_subkind(s);
      if (!tmpl.subkind) fail(source_name, "unknown subkind '" + s + "'");
    }
    tmpl.stop_tokens = string_list(meta, "stop", source_name);
    tmpl.expected_sections = string_list(meta, "sections", source_name);
  } catch (const YAML::Exception& e) {
    fail(source_name, std::string("front-matter: ") + e.what());
  }

  std::string current;
  std::vector<std::string> body;
  std::optional<std::string> pending_input;
  bool have_input = false;
  const auto flush = [&] {
    if (current.empty()) {
      if (!text::trim(block_text(body)).empty()) fail(source_name, "text before the first block");
      return;
    }
    auto content = block_text(body);
    if (current == "preamble") {
      tmpl.preamble = std::move(content);
    } else if (current == "example-input") {
      if (pending_input) fail(source_name, "example-input without example-output");
      pending_input = std::move(content);
    } else if (current == "example-output") {
      if (!pending_input) fail(source_name, "example-output without example-input");
      tmpl.few_shot_pairs.push_back({std::move(*pending_input), std::move(content)});
      pending_input.reset();
    } else if (current == "input") {
      tmpl.input_template = std::move(content);
      have_input = true;
    } else {
      fail(source_name, "unknown block [[" + current + "]]");
    }
  };
  for (std::size_t i = close + 1; i < lines.size(); ++i) {
    const auto t = text::trim(lines[i]);
    if (t.size() > 4 && t.substr(0, 2) == "[[" && t.substr(t.size() - 2) == "]]") {
      flush();
      current = std::string(t.substr(2, t.size() - 4));
      body.clear();
      continue;
    }
    body.push_back(lines[i]);
  }
  flush();
  if (pending_input) fail(source_name, "example-input without example-output");
  if (!have_input) fail(source_name, "missing [[input]] block");
  if (tmpl.few_shot_pairs.empty()) fail(source_name, "needs at least one example pair");

  std::set<std::string> seen;
  for (auto& name : placeholders(tmpl.input_template)) {
    if (!seen.insert(name).second) fail(source_name, "slot '" + name + "' appears twice");
    tmpl.input_slots.push_back(std::move(name));
  }
  return tmpl;
}

PromptTemplate load_template(const std::filesystem::path& path) {
  return parse_template(text::read_file(path), path.filename().string());
}

std::string fill_slots(const std::string& input_template,
                       const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const auto open = input_template.find("{{", pos);
    const auto close = open == std::string::npos ? open : input_template.find("}}", open + 2);
    if (close == std::string::npos) {
      out.append(input_template, pos);
      return out;
    }
    out.append(input_template, pos, open - pos);
    const auto name = input_template.substr(open + 2, close - open - 2);
    const auto it = values.find(name);
    if (it == values.end()) {
      throw Error(ErrorCode::MissingSlot, "slot '" + name + "' has no value");
    }
    out += it->second;
    pos = close + 2;
  }
}

}  // namespace tutorforge::prompts
