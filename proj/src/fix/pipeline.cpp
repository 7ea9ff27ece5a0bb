#include "tutorforge/fix/pipeline.hpp"

#include <map>

#include "tutorforge/core/error.hpp"
#include "tutorforge/core/text.hpp"
#include "tutorforge/fix/leak.hpp"
#include "tutorforge/markup/keywords.hpp"

namespace tutorforge::fix {

using markup::LineCompleted;
using markup::ParseWarning;
using markup::ProgressLineCount;
using markup::SectionEnd;
using markup::SectionStart;
using markup::StreamEvent;
using markup::TextDelta;

std::string_view to_string(RowKind kind) noexcept {
  switch (kind) {
    case RowKind::Unchanged: return "unchanged";
    case RowKind::Changed: return "changed";
    case RowKind::Removed: return "removed";
    case RowKind::Added: return "added";
  }
  return "unchanged";
}

std::vector<AnnotatedRow> build_rows(const std::vector<SourceLine>& buggy,
                                     const std::vector<AnnotationLabel>& labels) {
  std::vector<AnnotatedRow> rows;
  std::size_t next = 0;
  for (std::size_t g = 0; g <= buggy.size(); ++g) {
    while (next < labels.size() && labels[next].anchor == g &&
           labels[next].kind == LabelKind::AddedPlaceholder) {
      rows.push_back({RowKind::Added, std::nullopt, "", labels[next].id, labels[next].explanation});
      ++next;
    }
    if (g == buggy.size()) break;
    AnnotatedRow row{RowKind::Unchanged, g, buggy[g].raw, "", ""};
    if (next < labels.size() && labels[next].anchor == g) {
      row.kind = labels[next].kind == LabelKind::Changed ? RowKind::Changed : RowKind::Removed;
      row.label_id = labels[next].id;
      row.explanation = labels[next].explanation;
      ++next;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string render_listing(const std::vector<AnnotatedRow>& rows) {
  std::string out;
  for (const auto& row : rows) {
    if (row.line) {
      out += std::to_string(*row.line + 1) + " " + row.text;
    } else {
      out += "+ (missing line)";
    }
    if (!row.label_id.empty()) out += "  <- " + row.label_id;
    out += '\n';
  }
  return out;
}

namespace {

std::vector<prompts::LabelSite> label_sites(const std::vector<AnnotatedRow>& rows,
                                            std::size_t buggy_size) {
  std::vector<prompts::LabelSite> sites;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.label_id.empty()) continue;
    prompts::LabelSite site;
    site.id = row.label_id;
    site.kind = std::string(to_string(row.kind));
    if (row.line) {
      site.where = "line " + std::to_string(*row.line + 1);
      site.text = row.text;
    } else {
      std::optional<std::size_t> before;
      for (std::size_t k = r + 1; k < rows.size() && !before; ++k) before = rows[k].line;
      site.where = before ? "before line " + std::to_string(*before + 1)
                          : (buggy_size == 0 ? std::string("at the start")
                                             : "after line " + std::to_string(buggy_size));
    }
    sites.push_back(std::move(site));
  }
  return sites;
}

struct FixedDraft {
  std::vector<std::string> fixed_lines;
  std::string functions_text;
  std::optional<std::string> refusal;
  bool truncated = false;
};

}  // namespace

FixResponse run_fix_pipeline(const prompts::PromptLibrary& library, const std::string& buggy_code,
                             const std::string& intent, const gateway::Provider& provider,
                             const prompts::EventHandler& sink, const FixOptions& options) {
  // (1) pre-processing
  const auto buggy = prepare_source(buggy_code);
  if (buggy.lines.empty()) throw Error(ErrorCode::EmptyInput, "the code has no lines to fix");
  if (buggy.unterminated_block_comment) sink(ParseWarning{"unterminated block comment in code"});

  // (2) fixed code, then the change summary streamed through the leak gate.
  // The gate needs the complete fixed program, which the prompt asks for first.
  FixResponse response;
  FixedDraft draft;
  std::optional<PreparedSource> fixed;
  std::optional<LeakScanner> scanner;
  std::optional<GatedStream> gate;
  bool fixed_closed = false;
  // A summary arriving before the fixed program is complete cannot be checked
  // while it streams, so it is held back until the end.
  bool hold_summary = false;
  std::vector<std::string> held;
  const auto ensure_gate = [&] {
    if (gate) return;
    hold_summary = !fixed_closed;
    fixed = prepare_source(text::join(draft.fixed_lines, "\n"));
    scanner.emplace(buggy.lines, fixed->lines);
    gate.emplace(*scanner);
  };
  const auto release = [&](const std::vector<std::string>& fragments) {
    for (const auto& f : fragments) {
      response.change_summary += f;
      sink(TextDelta{kChangesSection, f});
    }
  };

  const auto prompt = library.build_fix_prompt(joined(buggy.lines), intent);
  const auto first = prompts::run_prompt(
      provider, prompt, library.grammar(),
      [&](const StreamEvent& event) {
        if (const auto* line = std::get_if<LineCompleted>(&event)) {
          if (line->section == "fixed" && !fixed_closed) {
            draft.fixed_lines.push_back(line->visible);
            sink(ProgressLineCount{draft.fixed_lines.size()});
          }
          return;
        }
        if (const auto* start = std::get_if<SectionStart>(&event)) {
          if (start->section == kChangesSection) {
            ensure_gate();
            if (!hold_summary) sink(event);
          } else if (start->section == "refusal") {
            draft.refusal.emplace();
            sink(event);
          }
          return;
        }
        if (const auto* delta = std::get_if<TextDelta>(&event)) {
          if (delta->section == kChangesSection) {
            if (hold_summary) {
              held.push_back(delta->fragment);
            } else {
              release(gate->push(delta->fragment));
            }
          } else if (delta->section == "functions") {
            draft.functions_text += delta->fragment;
          } else if (delta->section == "refusal") {
            *draft.refusal += delta->fragment;
            sink(event);
          }
          return;
        }
        if (const auto* end = std::get_if<SectionEnd>(&event)) {
          if (end->section == kChangesSection) {
            if (!hold_summary) {
              release(gate->finish());
              sink(event);
            }
          } else if (end->section == "fixed") {
            fixed_closed = true;
          } else if (end->section == "refusal") {
            sink(event);
          }
          return;
        }
        sink(event);
      },
      options.max_output_tokens);
  draft.truncated = first.finish == gateway::FinishReason::Length;
  response.truncated = draft.truncated;
  response.relevant_functions = markup::split_function_list(draft.functions_text);

  if (draft.refusal) {
    response.refusal = std::string(text::trim(*draft.refusal));
    response.change_summary.clear();
    return response;
  }
  if (draft.fixed_lines.empty()) {
    throw Error(ErrorCode::EmptyTransform, "the model returned no fixed program");
  }
  fixed = prepare_source(text::join(draft.fixed_lines, "\n"));
  scanner.emplace(buggy.lines, fixed->lines);
  std::string held_text;
  for (const auto& f : held) held_text += f;
  if (auto leak = scanner->find_leak(response.change_summary + held_text)) {
    throw Error(ErrorCode::GuardrailViolation, "change summary quotes fixed code: " + *leak);
  }
  if (!held.empty()) {
    sink(SectionStart{kChangesSection});
    release(held);
    sink(SectionEnd{kChangesSection});
  }

  // (3) matching and (4) labels
  const auto matching = match_lines(buggy.lines, fixed->lines);
  auto labels = annotate(buggy.lines, fixed->lines, matching);
  auto rows = build_rows(buggy.lines, labels);

  // (5) explanations
  if (labels.empty()) {
    response.note = kNoIssueNote;
  } else {
    std::map<std::string, std::string> explanations;
    const auto explain_prompt = library.build_annotation_explanation_prompt(
        render_listing(rows), label_sites(rows, buggy.lines.size()), joined(fixed->lines));
    const auto second = prompts::run_prompt(
        provider, explain_prompt, library.grammar(),
        [&](const StreamEvent& event) {
          if (const auto* line = std::get_if<LineCompleted>(&event)) {
            if (line->section != "labels") return;
            const auto id = std::string(text::trim(line->visible));
            const bool known = std::any_of(labels.begin(), labels.end(),
                                           [&](const auto& l) { return l.id == id; });
            if (!known) {
              sink(ParseWarning{"explanation for unknown label '" + id + "' dropped"});
            } else if (line->explanation && !line->explanation->empty() &&
                       !explanations.count(id)) {
              explanations[id] = *line->explanation;
            }
            return;
          }
          if (std::holds_alternative<ParseWarning>(event)) sink(event);
        },
        options.max_output_tokens);
    if (second.finish == gateway::FinishReason::Length) response.truncated = true;
    for (auto& row : rows) {
      if (row.label_id.empty()) continue;
      const auto it = explanations.find(row.label_id);
      if (it == explanations.end()) {
        sink(ParseWarning{"no explanation for label " + row.label_id});
        row.explanation = kGenericExplanation;
      } else {
        row.explanation = it->second;
      }
    }
  }
  response.rows = std::move(rows);

  // Post-hoc scan of every model-written field before anything else leaves.
  for (const auto& row : response.rows) {
    if (auto leak = scanner->find_leak(row.explanation)) {
      throw Error(ErrorCode::GuardrailViolation, "label explanation quotes fixed code: " + *leak);
    }
  }
  for (const auto& name : response.relevant_functions) {
    if (auto leak = scanner->find_leak(name)) {
      throw Error(ErrorCode::GuardrailViolation, "function list quotes fixed code: " + *leak);
    }
  }

  if (response.note) {
    sink(SectionStart{kNoteSection});
    sink(TextDelta{kNoteSection, *response.note});
    sink(SectionEnd{kNoteSection});
  } else {
    sink(SectionStart{kAnnotatedSection});
    for (const auto& row : response.rows) {
      LineCompleted line;
      line.section = kAnnotatedSection;
      line.visible = row.text;
      if (!row.label_id.empty()) line.explanation = row.explanation;
      line.tag = std::string(to_string(row.kind));
      sink(line);
    }
    sink(SectionEnd{kAnnotatedSection});
  }
  return response;
}

}  // namespace tutorforge::fix
