#pragma once

#include <string>
#include <vector>

#include "tutorforge/gateway/provider.hpp"
#include "tutorforge/prompts/call.hpp"
#include "tutorforge/prompts/library.hpp"

namespace tutorforge::scaffold {

struct PseudoCodeLine {
  std::string visible;  // trimmed
  std::string explanation;
  std::size_t indent_depth = 0;
  bool operator==(const PseudoCodeLine&) const = default;
};

/// What counts as concrete C syntax in a pseudo-code line.
struct SyntaxHeuristic {
  std::vector<std::string> forbidden_suffixes{";"};
  std::string forbidden_chars = "{}";
};

bool looks_concrete(const std::string& visible, const SyntaxHeuristic& heuristic);

/// Leading spaces / 4 plus leading tabs.
std::size_t indent_depth(std::string_view line);

PseudoCodeLine to_pseudocode_line(const markup::LineCompleted& line);

inline constexpr const char* kGenericStepExplanation = "this step is part of the program outline";
inline constexpr const char* kPseudocodeSection = "pseudocode";

struct PseudoCodeResult {
  std::vector<PseudoCodeLine> lines;
  std::size_t concrete_syntax_lines = 0;
  bool truncated = false;
};

struct PseudoCodeOptions {
  std::optional<int> max_output_tokens;
  SyntaxHeuristic heuristic;
};

/// Asks the model for pseudo-code of `code`. Each accepted line reaches `sink`
/// as a LineCompleted in the pseudocode section as soon as it parses; lines
/// missing an explanation get a generic one plus a warning. At most twice the
/// number of non-blank code lines are kept.
/// Errors: MissingSlot (empty code), EmptyTransform, provider errors.
PseudoCodeResult to_pseudocode(const prompts::PromptLibrary& library, const std::string& code,
                               const gateway::Provider& provider,
                               const prompts::EventHandler& sink,
                               const PseudoCodeOptions& options = {});

}  // namespace tutorforge::scaffold
