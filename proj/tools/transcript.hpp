#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "tutorforge/gateway/provider.hpp"
#include "tutorforge/prompts/library.hpp"
#include "tutorforge/scaffold/docstore.hpp"

namespace tutorforge::cli {

/// A golden transcript directory:
///   fixture.json  {"description", "max_output_tokens"?, "steps": [...], "completions": [...]}
///   script.json   prompt -> completion table recorded on bless
///   expected.txt  the transcript
///
/// Steps are {"op": "query", "as": user, "input": {...}},
/// {"op": "followup", "as": user, "parent": step, "question": text} and
/// {"op": "rate", "as": user, "response": step, "stars": n, "reason"?}, where
/// `step` is the 1-based number of an earlier query or follow-up. The user
/// "admin" has the admin role. Completions are served in call order while
/// blessing.
struct Fixture {
  std::string name;
  std::filesystem::path dir;
  nlohmann::json spec;
};

Fixture load_fixture(const std::filesystem::path& dir);

/// Runs every step against `provider` and returns the transcript text.
std::string run_transcript(const Fixture& fixture, const prompts::PromptLibrary& library,
                           const scaffold::DocStore& docs,
                           std::shared_ptr<const gateway::Provider> provider);

struct ReplayOutcome {
  std::string name;
  bool ok = true;
  std::string detail;  // first divergence
};

/// Replays against script.json and compares with expected.txt. With `bless`
/// the completions queue is served instead and both files are rewritten.
ReplayOutcome replay_fixture(const std::filesystem::path& dir, const prompts::PromptLibrary& library,
                             const scaffold::DocStore& docs, bool bless);

/// Fixture directories under `root`, sorted by name.
std::vector<std::filesystem::path> fixture_dirs(const std::filesystem::path& root);

}  // namespace tutorforge::cli
