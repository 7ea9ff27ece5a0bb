#include "tutorforge/service/responder.hpp"

#include <map>

#include "tutorforge/core/error.hpp"
#include "tutorforge/core/text.hpp"
#include "tutorforge/fix/pipeline.hpp"
#include "tutorforge/markup/keywords.hpp"
#include "tutorforge/prompts/call.hpp"
#include "tutorforge/records/render.hpp"
#include "tutorforge/scaffold/pseudocode.hpp"

namespace tutorforge::service {

namespace mk = tutorforge::markup;
using records::DocumentBuilder;
using records::Finish;

namespace {

// Sections of a feature response shown to the student as text or as a listing.
bool is_text_section(const std::string& s) { return s == "answer" || s == "summary"; }
bool is_listing_section(const std::string& s) { return s == "lines" || s == "example"; }

// Wire side of a response. Tracks whether content went out so a late refusal
// can retract it.
class Emitter {
 public:
  explicit Emitter(const WireSink& sink) : sink_(sink) {}

  void send(const records::WireEvent& event) {
    if (std::holds_alternative<mk::TextDelta>(event) ||
        std::holds_alternative<mk::LineCompleted>(event)) {
      content_sent_ = true;
    }
    if (sink_) sink_(event);
  }
  void forward(const mk::StreamEvent& event) { send(records::to_wire(event)); }

  void withhold() {
    if (sink_) {
      sink_(mk::SectionStart{records::kWithheldSection});
      sink_(mk::SectionEnd{records::kWithheldSection});
    }
    content_sent_ = false;
  }

  void section_text(const std::string& section, const std::string& text) {
    send(mk::SectionStart{section});
    send(mk::TextDelta{section, text});
    send(mk::SectionEnd{section});
  }

  void section_lines(const std::string& section, const std::vector<std::string>& items) {
    if (items.empty()) return;
    send(mk::SectionStart{section});
    for (const auto& item : items) send(mk::LineCompleted{section, item, std::nullopt, ""});
    send(mk::SectionEnd{section});
  }

  void warn(std::string detail) { send(mk::ParseWarning{std::move(detail)}); }

  [[nodiscard]] bool content_sent() const noexcept { return content_sent_; }

 private:
  const WireSink& sink_;
  bool content_sent_ = false;
};

// Collects refusal text instead of streaming it, so the wire and the document
// carry the same trimmed text.
struct RefusalCapture {
  bool seen = false;
  std::string text;

  // True when the event belonged to the refusal section.
  bool take(const mk::StreamEvent& event, Emitter& out) {
    if (const auto* start = std::get_if<mk::SectionStart>(&event)) {
      if (start->section != records::kRefusalSection) return false;
      if (!seen && out.content_sent()) out.withhold();
      seen = true;
      return true;
    }
    if (const auto* delta = std::get_if<mk::TextDelta>(&event)) {
      if (delta->section != records::kRefusalSection) return false;
      text += delta->fragment;
      return true;
    }
    if (const auto* end = std::get_if<mk::SectionEnd>(&event)) {
      return end->section == records::kRefusalSection;
    }
    return false;
  }

  [[nodiscard]] std::string final_text() const {
    const auto t = std::string(text::trim(text));
    return t.empty() ? std::string(kOffTopicRefusal) : t;
  }
};

void refuse(Emitter& out, DocumentBuilder& doc, const std::string& text) {
  if (out.content_sent()) out.withhold();
  out.section_text(records::kRefusalSection, text);
  doc.withhold();
  doc.append_text(records::kRefusalSection, text);
  doc.set_finish(Finish::Refused);
}

std::vector<std::string> known_functions(const scaffold::DocStore& docs, const std::string& text) {
  std::vector<std::string> out;
  for (const auto& d : scaffold::lookup_docs(docs, mk::split_function_list(text))) {
    out.push_back(d.name);
  }
  return out;
}

// Pseudo-code for hidden code, streamed line by line.
bool add_pseudocode(const GenerationContext& ctx, const std::vector<std::string>& code_lines,
                    Emitter& out, DocumentBuilder& doc) {
  scaffold::PseudoCodeOptions options;
  options.max_output_tokens = ctx.max_output_tokens;
  scaffold::PseudoCodeResult result;
  try {
    result = scaffold::to_pseudocode(ctx.library, text::join(code_lines, "\n") + "\n", ctx.provider,
                                     [&](const mk::StreamEvent& e) { out.forward(e); }, options);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyTransform) throw;
    out.warn("no pseudo-code was produced");
    return false;
  }
  if (result.concrete_syntax_lines > 0) {
    out.warn(std::to_string(result.concrete_syntax_lines) +
             " pseudo-code lines look like C syntax");
  }
  for (const auto& line : result.lines) {
    doc.add_pseudo_line({line.indent_depth, line.visible, line.explanation});
  }
  return result.truncated;
}

void add_functions(const std::vector<std::string>& names, Emitter& out, DocumentBuilder& doc) {
  out.section_lines(records::kFunctionsSection, names);
  for (const auto& n : names) doc.add_function(n);
}

void add_suggestions(const GenerationContext& ctx, const records::Query& query, Emitter& out,
                     DocumentBuilder& doc) {
  std::vector<std::string> items;
  try {
    items = prompts::suggest_followups(
        ctx.library, ctx.provider, exchange_text(query, doc.document()),
        [&](const mk::StreamEvent& e) {
          if (std::holds_alternative<mk::ParseWarning>(e)) out.forward(e);
        },
        ctx.max_output_tokens);
  } catch (const Error& e) {
    out.warn(std::string("follow-up suggestions unavailable: ") + e.what());
    return;
  }
  out.section_lines(records::kSuggestionsSection, items);
  for (const auto& s : items) doc.add_suggestion(s);
}

// Features answered by one feature prompt, optionally followed by pseudo-code
// of the hidden code it produced.
void answer_feature(const GenerationContext& ctx, const records::Query& query,
                    const std::optional<std::string>& prior_exchange, Emitter& out,
                    DocumentBuilder& doc) {
  prompts::FeatureInputs inputs;
  inputs.question = query.question;
  inputs.code = query.code;
  inputs.intended_behavior = query.intended_behavior;
  if (query.feature == FeatureKind::FollowUp || query.feature == FeatureKind::InlineExploration) {
    inputs.prior_exchange = prior_exchange.value_or("none");
  }
  const auto prompt = ctx.library.build_feature_prompt(query.feature, inputs, query.subkind);

  RefusalCapture refusal;
  std::vector<std::string> code_lines;
  std::string functions_text;
  // Visible content in stream order, replayed into the document afterwards.
  struct Piece {
    std::string section;
    std::string text;
    std::optional<std::string> explanation;
    bool line = false;
  };
  std::vector<Piece> pieces;

  const auto call = prompts::run_prompt(
      ctx.provider, prompt, ctx.library.grammar(),
      [&](const mk::StreamEvent& event) {
        if (refusal.take(event, out)) return;
        if (std::holds_alternative<mk::ParseWarning>(event)) {
          out.forward(event);
          return;
        }
        if (refusal.seen) return;
        std::visit(
            [&](const auto& e) {
              using E = std::decay_t<decltype(e)>;
              if constexpr (std::is_same_v<E, mk::SectionStart> || std::is_same_v<E, mk::SectionEnd>) {
                if (is_text_section(e.section) || is_listing_section(e.section)) out.forward(event);
              } else if constexpr (std::is_same_v<E, mk::TextDelta>) {
                if (e.section == records::kFunctionsSection) {
                  functions_text += e.fragment;
                } else if (is_text_section(e.section)) {
                  out.forward(event);
                  pieces.push_back({e.section, e.fragment, std::nullopt, false});
                }
              } else if constexpr (std::is_same_v<E, mk::LineCompleted>) {
                if (e.section == "code") {
                  code_lines.push_back(e.visible);
                  out.send(mk::ProgressLineCount{code_lines.size()});
                } else if (is_listing_section(e.section)) {
                  out.forward(event);
                  pieces.push_back({e.section, e.visible, e.explanation, true});
                }
              }
            },
            event);
      },
      ctx.max_output_tokens);
  bool truncated = call.finish == gateway::FinishReason::Length;

  if (refusal.seen) {
    refuse(out, doc, refusal.final_text());
    return;
  }
  for (auto& p : pieces) {
    if (p.line) {
      doc.add_listing_line(p.section, {std::move(p.text), std::move(p.explanation)});
    } else {
      doc.append_text(p.section, p.text);
    }
  }
  if (!code_lines.empty()) truncated = add_pseudocode(ctx, code_lines, out, doc) || truncated;
  add_functions(known_functions(ctx.docs, functions_text), out, doc);
  if (supports_followup(query.feature)) add_suggestions(ctx, query, out, doc);
  if (truncated) doc.set_finish(Finish::Truncated);
}

void fix_feature(const GenerationContext& ctx, const records::Query& query, Emitter& out,
                 DocumentBuilder& doc) {
  RefusalCapture refusal;
  fix::FixOptions options;
  options.max_output_tokens = ctx.max_output_tokens;
  fix::FixResponse response;
  try {
    response = fix::run_fix_pipeline(
        ctx.library, query.code.value_or(""), query.intended_behavior.value_or(""), ctx.provider,
        [&](const mk::StreamEvent& event) {
          if (refusal.take(event, out)) return;
          if (refusal.seen && !std::holds_alternative<mk::ParseWarning>(event)) return;
          out.forward(event);
        },
        options);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::GuardrailViolation) throw;
    // The violation message quotes the guarded line, so it stays off the wire.
    out.warn("response withheld: it quoted corrected code");
    refuse(out, doc, kWithheldRefusal);
    return;
  }
  if (response.refusal || refusal.seen) {
    refuse(out, doc, refusal.final_text());
    return;
  }
  doc.append_text(fix::kChangesSection, response.change_summary);
  if (response.note) {
    doc.append_text(fix::kNoteSection, *response.note);
  } else {
    for (const auto& row : response.rows) {
      records::AnnotatedLine line{std::string(fix::to_string(row.kind)), row.text, std::nullopt};
      if (!row.label_id.empty()) line.explanation = row.explanation;
      doc.add_annotated_line(std::move(line));
    }
  }
  std::vector<std::string> names;
  for (const auto& d : scaffold::lookup_docs(ctx.docs, response.relevant_functions)) {
    names.push_back(d.name);
  }
  add_functions(names, out, doc);
  if (response.truncated) doc.set_finish(Finish::Truncated);
}

}  // namespace

std::string exchange_text(const records::Query& query, const records::ResponseDocument& doc) {
  std::string out;
  if (query.question) out += "Question: " + *query.question + "\n";
  if (query.code) out += "Code:\n" + *query.code + (query.code->ends_with('\n') ? "" : "\n");
  if (query.intended_behavior) out += "Intended behavior: " + *query.intended_behavior + "\n";
  auto body = doc;
  std::erase_if(body.segments,
                [](const records::Segment& s) { return std::holds_alternative<records::Disclaimer>(s); });
  out += "Response:\n" + std::string(text::trim(records::render_text(body)));
  return out;
}

records::ResponseDocument generate_response(const GenerationContext& context,
                                            const records::Query& query,
                                            const std::string& response_id,
                                            const std::optional<std::string>& prior_exchange,
                                            const WireSink& sink) {
  Emitter out(sink);
  DocumentBuilder doc(response_id, query.id);
  out.send(records::ResponseStarted{response_id, query.id, std::string(to_string(query.feature)),
                                    query.parent_response});
  if (sink) {
    sink(mk::SectionStart{records::kDisclaimerSection});
    sink(mk::TextDelta{records::kDisclaimerSection, records::kDisclaimerText});
    sink(mk::SectionEnd{records::kDisclaimerSection});
  }
  doc.disclaimer();
  if (query.feature == FeatureKind::HelpFixCode) {
    fix_feature(context, query, out, doc);
  } else {
    answer_feature(context, query, prior_exchange, out, doc);
  }
  return doc.take();
}

}  // namespace tutorforge::service
