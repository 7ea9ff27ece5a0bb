#include "tutorforge/scaffold/pseudocode.hpp"

#include "tutorforge/core/error.hpp"
#include "tutorforge/core/text.hpp"

namespace tutorforge::scaffold {

using markup::LineCompleted;
using markup::ParseWarning;
using markup::SectionEnd;
using markup::SectionStart;

bool looks_concrete(const std::string& visible, const SyntaxHeuristic& heuristic) {
  const auto t = text::trim(visible);
  for (const auto& suffix : heuristic.forbidden_suffixes) {
    if (!suffix.empty() && t.size() >= suffix.size() &&
        t.substr(t.size() - suffix.size()) == suffix) {
      return true;
    }
  }
  return t.find_first_of(heuristic.forbidden_chars) != std::string_view::npos;
}

std::size_t indent_depth(std::string_view line) {
  std::size_t spaces = 0;
  std::size_t tabs = 0;
  for (char c : line) {
    if (c == ' ') {
      ++spaces;
    } else if (c == '\t') {
      ++tabs;
    } else {
      break;
    }
  }
  return spaces / 4 + tabs;
}

PseudoCodeLine to_pseudocode_line(const LineCompleted& line) {
  PseudoCodeLine out;
  out.visible = std::string(text::trim(line.visible));
  out.explanation = line.explanation ? *line.explanation : std::string();
  out.indent_depth = indent_depth(line.visible);
  return out;
}

PseudoCodeResult to_pseudocode(const prompts::PromptLibrary& library, const std::string& code,
                               const gateway::Provider& provider,
                               const prompts::EventHandler& sink,
                               const PseudoCodeOptions& options) {
  const auto prompt = library.build_pseudocode_prompt(code);
  const std::size_t bound = 2 * text::count_nonblank_lines(code);
  PseudoCodeResult result;
  bool opened = false;
  std::size_t dropped = 0;
  const auto call = prompts::run_prompt(
      provider, prompt, library.grammar(),
      [&](const markup::StreamEvent& event) {
        if (const auto* warning = std::get_if<ParseWarning>(&event)) {
          sink(*warning);
          return;
        }
        const auto* line = std::get_if<LineCompleted>(&event);
        if (!line || line->section != kPseudocodeSection) return;
        if (text::trim(line->visible).empty()) return;
        if (result.lines.size() >= bound) {
          ++dropped;
          return;
        }
        LineCompleted accepted = *line;
        if (!accepted.explanation || accepted.explanation->empty()) {
          sink(ParseWarning{"pseudo-code line without explanation: " +
                            std::string(text::trim(line->visible))});
          accepted.explanation = kGenericStepExplanation;
        }
        if (!opened) {
          sink(SectionStart{kPseudocodeSection});
          opened = true;
        }
        auto converted = to_pseudocode_line(accepted);
        if (looks_concrete(converted.visible, options.heuristic)) ++result.concrete_syntax_lines;
        result.lines.push_back(std::move(converted));
        sink(accepted);
      },
      options.max_output_tokens);
  result.truncated = call.finish == gateway::FinishReason::Length;
  if (dropped > 0) {
    sink(ParseWarning{"dropped " + std::to_string(dropped) +
                      " pseudo-code lines beyond twice the code length"});
  }
  if (result.lines.empty()) {
    throw Error(ErrorCode::EmptyTransform, "the model returned no pseudo-code lines");
  }
  sink(SectionEnd{kPseudocodeSection});
  return result;
}

}  // namespace tutorforge::scaffold
