#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tutorforge/fix/matching.hpp"
#include "tutorforge/gateway/provider.hpp"
#include "tutorforge/prompts/call.hpp"
#include "tutorforge/prompts/library.hpp"

namespace tutorforge::fix {

enum class RowKind { Unchanged, Changed, Removed, Added };

std::string_view to_string(RowKind kind) noexcept;

/// One row of the annotated buggy program. Added rows are empty
/// placeholders and carry no text.
struct AnnotatedRow {
  RowKind kind = RowKind::Unchanged;
  std::optional<std::size_t> line;  // buggy line index
  std::string text;
  std::string label_id;
  std::string explanation;
  bool operator==(const AnnotatedRow&) const = default;
};

struct FixResponse {
  std::string change_summary;
  std::vector<AnnotatedRow> rows;
  std::vector<std::string> relevant_functions;
  /// Set instead of labels when the fixed program matches the buggy one.
  std::optional<std::string> note;
  std::optional<std::string> refusal;
  bool truncated = false;
  bool operator==(const FixResponse&) const = default;
};

inline constexpr const char* kGenericExplanation =
    "review this line against the intended behavior";
inline constexpr const char* kNoIssueNote =
    "No issue was found in the code itself. Check how the program is compiled and run, the "
    "input it receives, and whether the intended behavior matches the exercise.";

/// Section ids emitted by the pipeline in addition to parser sections.
inline constexpr const char* kAnnotatedSection = "annotated";
inline constexpr const char* kNoteSection = "note";
inline constexpr const char* kChangesSection = "changes";

struct FixOptions {
  std::optional<int> max_output_tokens;
};

/// Rows of the buggy program with labels interleaved in anchor order.
std::vector<AnnotatedRow> build_rows(const std::vector<SourceLine>& buggy,
                                     const std::vector<AnnotationLabel>& labels);

/// Listing handed to the explanation prompt: numbered rows with "<- Ln"
/// markers on labeled ones.
std::string render_listing(const std::vector<AnnotatedRow>& rows);

/// Runs the five-step pipeline. Events reaching `sink`: refusal text,
/// ProgressLineCount while the fixed program is generated, the change summary
/// as it streams, warnings, and finally the annotated rows (or a note). The
/// fixed program itself never reaches the sink or the result.
/// Errors: EmptyInput, EmptyTransform, GuardrailViolation, provider errors.
FixResponse run_fix_pipeline(const prompts::PromptLibrary& library, const std::string& buggy_code,
                             const std::string& intent, const gateway::Provider& provider,
                             const prompts::EventHandler& sink, const FixOptions& options = {});

}  // namespace tutorforge::fix
