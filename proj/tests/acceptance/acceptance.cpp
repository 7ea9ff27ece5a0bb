// Acceptance gate: one PASS/FAIL line per primary criterion. Exit status is
// the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "fixtures.hpp"
#include "lcs_oracle.hpp"
#include "reference_parser.hpp"
#include "stub_llm_server.hpp"
#include "transcript.hpp"
#include "universal_provider.hpp"
#include "tutorforge/analytics/quality.hpp"
#include "tutorforge/analytics/stats.hpp"
#include "tutorforge/core/error.hpp"
#include "tutorforge/core/text.hpp"
#include "tutorforge/fix/matching.hpp"
#include "tutorforge/fix/preprocess.hpp"
#include "tutorforge/gateway/http_provider.hpp"
#include "tutorforge/gateway/scripted.hpp"
#include "tutorforge/markup/parser.hpp"
#include "tutorforge/records/wire.hpp"
#include "tutorforge/service/responder.hpp"
#include "tutorforge/service/tutor.hpp"

using namespace tutorforge;
namespace fs = std::filesystem;

namespace {

// Pinned limits.
constexpr double kChunkingSeconds = 60.0;
constexpr double kMatchingSeconds = 120.0;
constexpr int kRandomSplitsPerDoc = 500;
constexpr int kRandomMatchPairs = 1000;
constexpr std::size_t kExhaustiveLength = 8;
constexpr int kLeakMutations = 200;
constexpr std::size_t kStateMachineOps = 10000;
constexpr std::size_t kMinTranscripts = 10;
constexpr double kKappaTolerance = 1e-9;

struct Outcome {
  bool ok = true;
  std::string detail;
};

class Criterion {
 public:
  explicit Criterion(Outcome& o) : o_(o) {}
  bool check(bool cond, const std::string& why) {
    if (!cond && o_.ok) {
      o_.ok = false;
      o_.detail = why;
    }
    return cond;
  }

 private:
  Outcome& o_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ------------------------------------------------------------------ chunking

std::vector<std::string> expected_sections(const fs::path& doc) {
  auto sidecar = doc;
  sidecar.replace_extension(".sections");
  if (!fs::exists(sidecar)) return {};
  return text::split_lines(text::read_file(sidecar));
}

markup::EventList chunked(const markup::MarkupGrammar& g, const std::vector<std::string>& sections,
                          std::string_view doc, const std::vector<std::size_t>& cuts) {
  markup::StreamParser parser(g, sections);
  markup::EventList all;
  std::size_t prev = 0;
  const auto add = [&](markup::EventList more) { all.insert(all.end(), more.begin(), more.end()); };
  for (auto cut : cuts) {
    add(parser.feed(doc.substr(prev, cut - prev)));
    prev = cut;
  }
  add(parser.feed(doc.substr(prev)));
  add(parser.finalize());
  return all;
}

Outcome chunking_invariance() {
  Outcome o;
  Criterion c(o);
  const auto t0 = std::chrono::steady_clock::now();
  const auto& g = markup::default_grammar();
  const auto docs = testkit::files_with_extension(testkit::test_data("conformance"), ".doc");
  std::mt19937 rng(50);
  std::size_t traces = 0;
  c.check(docs.size() == 50, fmt::format("corpus has {} documents, want 50", docs.size()));
  for (const auto& path : docs) {
    const auto doc = text::read_file(path);
    const auto sections = expected_sections(path);
    const auto batch = markup::parse_document(g, doc, sections);
    // Second route: the whole-document reference parser.
    if (!c.check(testkit::render_trace(batch) ==
                     testkit::render_trace(testkit::reference_parse(g, doc, sections)),
                 path.filename().string() + " disagrees with the reference parser")) {
      return o;
    }
    for (std::size_t cut = 1; cut < doc.size(); ++cut) {
      ++traces;
      if (!c.check(chunked(g, sections, doc, {cut}) == batch,
                   fmt::format("{} split at {}", path.filename().string(), cut))) {
        return o;
      }
    }
    for (int round = 0; round < kRandomSplitsPerDoc && doc.size() > 1; ++round) {
      std::set<std::size_t> cuts;
      const std::size_t n = 1 + rng() % 16;
      for (std::size_t k = 0; k < n; ++k) cuts.insert(1 + rng() % (doc.size() - 1));
      ++traces;
      if (!c.check(chunked(g, sections, doc, {cuts.begin(), cuts.end()}) == batch,
                   fmt::format("{} random split {}", path.filename().string(), round))) {
        return o;
      }
    }
  }
  const double s = seconds_since(t0);
  c.check(s < kChunkingSeconds, fmt::format("took {:.1f} s", s));
  if (o.ok) o.detail = fmt::format("{} documents, {} chunkings, {:.1f} s", docs.size(), traces, s);
  return o;
}

// ------------------------------------------------------------------ matching

std::size_t equal_pairs(const fix::LineMatching& m, const std::vector<fix::SourceLine>& a,
                        const std::vector<fix::SourceLine>& b, bool& valid) {
  std::size_t n = 0;
  for (std::size_t k = 0; k < m.pairs.size(); ++k) {
    const auto& p = m.pairs[k];
    if (p.buggy >= a.size() || p.fixed >= b.size()) valid = false;
    if (k > 0 && (p.buggy <= m.pairs[k - 1].buggy || p.fixed <= m.pairs[k - 1].fixed)) valid = false;
    if (p.kind == fix::PairKind::Equal) {
      if (a[p.buggy].normalized != b[p.fixed].normalized) valid = false;
      ++n;
    }
  }
  return n;
}

Outcome matching_optimality() {
  Outcome o;
  Criterion c(o);
  const auto t0 = std::chrono::steady_clock::now();
  testkit::SubsequenceIndex index(kExhaustiveLength);
  std::vector<std::vector<fix::SourceLine>> lines(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) lines[i] = testkit::symbol_lines(index.sequence(i));
  // Every pair of sequences up to the length bound, one representative per
  // relabeling of the three symbols.
  std::size_t pairs = 0;
  for (std::size_t ia = 0; ia < index.size(); ++ia) {
    for (std::size_t ib = 0; ib < index.size(); ++ib) {
      if (!testkit::canonical_labeling(index.sequence(ia), index.sequence(ib))) continue;
      bool valid = true;
      const auto m = fix::match_lines(lines[ia], lines[ib]);
      const auto n = equal_pairs(m, lines[ia], lines[ib], valid);
      ++pairs;
      if (!c.check(valid && n == index.lcs_length(ia, ib),
                   fmt::format("exhaustive pair {}/{}: {} vs oracle {}", ia, ib, n,
                               index.lcs_length(ia, ib)))) {
        return o;
      }
    }
  }
  std::mt19937 rng(1000);
  for (int t = 0; t < kRandomMatchPairs; ++t) {
    testkit::Symbols a(20), b(20);
    for (auto& x : a) x = static_cast<int>(rng() % 4);
    for (auto& x : b) x = static_cast<int>(rng() % 4);
    const auto la = testkit::symbol_lines(a);
    const auto lb = testkit::symbol_lines(b);
    bool valid = true;
    const auto n = equal_pairs(fix::match_lines(la, lb), la, lb, valid);
    if (!c.check(valid && n == testkit::dp_lcs_length(a, b), fmt::format("random pair {}", t))) return o;
  }
  const double s = seconds_since(t0);
  c.check(s < kMatchingSeconds, fmt::format("took {:.1f} s", s));
  if (o.ok) {
    o.detail = fmt::format("{} exhaustive pairs (length <= {}), {} random 20-line pairs, {:.1f} s",
                           pairs, kExhaustiveLength, kRandomMatchPairs, s);
  }
  return o;
}

// ------------------------------------------------------------------ guardrail

/// Whitespace-free form used by the leak oracle.
std::string squeeze(std::string_view s) {
  std::string out;
  for (char ch : s) {
    if (!std::isspace(static_cast<unsigned char>(ch))) out += ch;
  }
  return out;
}

/// Drops C comments; string literals in the corpus never contain markers.
std::string uncommented(const std::string& s) {
  static const std::regex comment(R"(/\*[\s\S]*?\*/|//[^\n]*)");
  return std::regex_replace(s, comment, "");
}

std::size_t word_count(const std::string& line) {
  static const std::regex word(R"([A-Za-z_][A-Za-z0-9_]*|[0-9]+)");
  return static_cast<std::size_t>(
      std::distance(std::sregex_iterator(line.begin(), line.end(), word), std::sregex_iterator()));
}

/// Splits "a; b;" after each semicolon outside parentheses.
std::vector<std::string> statements(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char ch : line) {
    cur += ch;
    depth += ch == '(' ? 1 : ch == ')' ? -1 : 0;
    if (ch == ';' && depth == 0) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!squeeze(cur).empty()) out.push_back(cur);
  return out;
}

/// Everything a student could see, except the echo of their own code rows,
/// which is checked separately.
struct Exposure {
  std::string text;
  std::vector<std::string> echoed_rows;
};

Exposure exposure_of(const std::vector<records::WireEvent>& events) {
  Exposure e;
  for (const auto& ev : events) {
    if (const auto* d = std::get_if<markup::TextDelta>(&ev)) e.text += d->fragment;
    if (const auto* l = std::get_if<markup::LineCompleted>(&ev)) {
      if (l->section == records::kAnnotatedSection) {
        e.echoed_rows.push_back(l->visible);
      } else {
        e.text += "\n" + l->visible + "\n";
      }
      if (l->explanation) e.text += "\n" + *l->explanation + "\n";
    }
    if (const auto* w = std::get_if<markup::ParseWarning>(&ev)) e.text += "\n" + w->detail + "\n";
  }
  return e;
}

/// Leaked fixed-only lines, or why the echoed rows are wrong.
std::optional<std::string> leak_in(const std::string& buggy, const std::string& fixed,
                                   const Exposure& e) {
  std::set<std::string> own;
  for (const auto& l : text::split_lines(uncommented(buggy))) {
    own.insert(squeeze(l));
    for (const auto& piece : statements(l)) own.insert(squeeze(piece));
  }
  for (const auto& row : e.echoed_rows) {
    if (!row.empty() && !own.count(squeeze(uncommented(row)))) return "echoed row is not student code: " + row;
  }
  const auto hay = squeeze(e.text);
  const auto bare_hay = squeeze(uncommented(e.text));
  for (const auto& l : text::split_lines(fixed)) {
    const auto bare = uncommented(l);
    if (word_count(bare) < 2) continue;
    // A statement per line, as students would copy it.
    for (const auto& piece : statements(bare)) {
      const auto key = squeeze(piece);
      if (key.empty() || own.count(key) || word_count(piece) < 2) continue;
      if (hay.find(key) != std::string::npos || bare_hay.find(key) != std::string::npos) {
        return "fixed-only code shown: " + l;
      }
    }
  }
  return std::nullopt;
}

const std::vector<std::string> kPrograms = {
    "int sum(int a[], int n) {\n    int s = 0;\n    for (int i = 0; i <= n; i++)\n        s += a[i];\n    return s;\n}\n",
    "int main(void) {\n    int count;\n    scanf(\"%d\", &count);\n    while (count > 0)\n        printf(\"%d\\n\", count);\n    return 0;\n}\n",
    "double average(int values[], int n) {\n    int total = 0;\n    for (int k = 1; k < n; k++)\n        total = values[k];\n    return total / n;\n}\n",
    "int is_even(int x) {\n    if (x % 2 = 0)\n        return 1;\n    return 0;\n}\n",
    "void copy(char dst[], char src[]) {\n    int j = 0;\n    while (src[j] != '\\0') {\n        dst[j] = src[j];\n    }\n}\n",
};

const std::vector<std::string> kNewLines = {
    "    total = total + values[0];", "    count = count - 1;", "    dst[j] = \'\\0\';",
    "    j = j + 1;", "    if (n == 0) return 0;", "    s = s * factor_value;",
    "    result_value = compute(x, y);"};

std::string mutate(const std::string& program, std::mt19937& rng) {
  auto lines = text::split_lines(program);
  const int edits = 1 + static_cast<int>(rng() % 3);
  for (int k = 0; k < edits; ++k) {
    const auto at = 1 + rng() % (lines.size() - 2);
    switch (rng() % 3) {
      case 0: {  // modify: change an operator or constant
        auto& l = lines[at];
        static const std::vector<std::pair<std::string, std::string>> swaps = {
            {"<=", "<"}, {"= 0", "= 1"}, {"> 0", ">= 1"}, {"=", "=="}, {"1", "0"}, {"+=", "-="}};
        bool done = false;
        for (const auto& [from, to] : swaps) {
          if (const auto p = l.find(from); p != std::string::npos && !done) {
            l.replace(p, from.size(), to + " /* fixed */");
            done = true;
          }
        }
        if (!done) l += " extra_step(fixed_flag);";
        break;
      }
      case 1: lines.insert(lines.begin() + static_cast<long>(at), kNewLines[rng() % kNewLines.size()]); break;
      default: if (lines.size() > 3) lines.erase(lines.begin() + static_cast<long>(at)); break;
    }
  }
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

std::vector<std::string> fixed_only(const std::string& buggy, const std::string& fixed) {
  std::set<std::string> own;
  for (const auto& l : text::split_lines(uncommented(buggy))) own.insert(squeeze(l));
  std::vector<std::string> out;
  for (const auto& l : text::split_lines(fixed)) {
    if (!own.count(squeeze(uncommented(l))) && word_count(uncommented(l)) >= 2) {
      out.push_back(std::string(text::trim(l)));
    }
  }
  return out;
}

struct Services {
  std::shared_ptr<const prompts::PromptLibrary> library =
      std::make_shared<prompts::PromptLibrary>(prompts::PromptLibrary::load(testkit::repo_data("prompts")));
  std::shared_ptr<const scaffold::DocStore> docs =
      std::make_shared<scaffold::DocStore>(scaffold::load_docstore(testkit::repo_data("docs/store.json")));
};

Outcome guardrail_scan(const Services& svc) {
  Outcome o;
  Criterion c(o);
  std::size_t goldens = 0, mutations = 0, attempts = 0, withheld = 0;

  // Golden transcripts: every help-fix-code step.
  for (const auto& dir : cli::fixture_dirs(testkit::fixtures("transcripts"))) {
    const auto fixture = cli::load_fixture(dir);
    const auto expected = text::read_file(dir / "expected.txt");
    std::size_t step_no = 0;
    std::size_t completion = 0;
    const auto& completions = fixture.spec["completions"];
    for (const auto& step : fixture.spec["steps"]) {
      ++step_no;
      if (step["op"] != "query" || step["input"].value("feature", "") != "help-fix-code") continue;
      const auto buggy = step["input"]["code"].get<std::string>();
      // The fix completion of this step: the first unused one with a fixed block.
      std::string fixed;
      for (; completion < completions.size(); ++completion) {
        const auto t = completions[completion].get<std::string>();
        const auto a = t.find("// [fixed-start]\n");
        if (a == std::string::npos) continue;
        fixed = t.substr(a + 17, t.find("// [fixed-end]") - a - 17);
        ++completion;
        break;
      }
      const auto head = fmt::format("### step {}:", step_no);
      const auto from = expected.find(head);
      const auto to = expected.find("--- rendered", from);
      if (!c.check(from != std::string::npos && to != std::string::npos,
                   fixture.name + ": step missing from transcript")) {
        return o;
      }
      const auto body_at = expected.find('\n', from) + 1;
      if (expected.compare(body_at, 6, "error:") == 0) continue;
      if (!c.check(!fixed.empty(), fixture.name + ": no scripted fix for the step")) return o;
      auto seen = exposure_of(records::decode_wire(expected.substr(body_at, to - body_at)));
      const auto next = expected.find("\n### step", to);
      seen.text += expected.substr(to, next == std::string::npos ? std::string::npos : next - to);
      const auto leak = leak_in(buggy, fixed, seen);
      if (!c.check(!leak, fixture.name + ": " + leak.value_or(""))) return o;
      ++goldens;
    }
  }
  c.check(goldens >= 2, fmt::format("only {} help-fix-code golden steps", goldens));

  // Randomized mutations; half the scripted completions try to smuggle a
  // fixed-only line into the summary or a label explanation.
  std::mt19937 rng(200);
  for (int m = 0; m < kLeakMutations; ++m) {
    const auto& buggy = kPrograms[m % kPrograms.size()];
    auto fixed = mutate(buggy, rng);
    if (fixed == buggy) fixed += "int unused_helper(int q) { return q * 2; }\n";
    const auto secret = fixed_only(buggy, fixed);
    const char* const mode[] = {"clean", "summary", "label"};
    const std::string how = mode[rng() % 3];
    const std::string smuggled = secret.empty() ? "" : secret[rng() % secret.size()];
    std::string summary = "Look at how the values change on each pass of the loop.";
    if (how == "summary" && !smuggled.empty()) {
      summary = "Replace it with " + smuggled + " and it works.";
      ++attempts;
    }
    std::string labels = "// [labels-start]\n";
    for (int k = 1; k <= 6; ++k) {
      std::string why = "compare this line with what the loop should do";
      if (how == "label" && k == 1 && !smuggled.empty()) {
        why = "write " + smuggled;
        ++attempts;
      }
      labels += fmt::format("L{} /// {}\n", k, why);
    }
    labels += "// [labels-end]\n// [end]\n";
    const std::vector<gateway::ScriptEntry> queue = {
        {"// [fixed-start]\n" + fixed + "// [fixed-end]\n// [changes]: " + summary +
             "\n// [functions]: printf\n// [end]\n",
         {}},
        {labels, {}}};
    gateway::SequentialProvider provider(queue);
    records::Query q;
    q.id = fmt::format("q-{}", m);
    q.feature = FeatureKind::HelpFixCode;
    q.code = buggy;
    q.intended_behavior = "work as described in the exercise";
    std::vector<records::WireEvent> events;
    records::ResponseDocument doc;
    try {
      doc = service::generate_response({*svc.library, provider, *svc.docs, std::nullopt}, q,
                                       fmt::format("r-{}", m), std::nullopt,
                                       [&](const records::WireEvent& e) { events.push_back(e); });
    } catch (const Error& e) {
      c.check(false, fmt::format("mutation {}: {}", m, e.what()));
      return o;
    }
    if (doc.finish == records::Finish::Refused) ++withheld;
    if (auto leak = leak_in(buggy, fixed, exposure_of(events))) {
      c.check(false, fmt::format("mutation {} ({}): {}", m, how, *leak));
      return o;
    }
    // The stored document is held to the same standard.
    std::vector<records::WireEvent> doc_events;
    for (const auto& s : doc.segments) {
      if (const auto* t = std::get_if<records::AnswerText>(&s)) doc_events.emplace_back(markup::TextDelta{t->section, t->text});
      if (const auto* a = std::get_if<records::Annotated>(&s)) {
        for (const auto& r : a->rows) {
          doc_events.emplace_back(markup::LineCompleted{records::kAnnotatedSection, r.text, r.explanation, r.kind});
        }
      }
    }
    if (auto leak = leak_in(buggy, fixed, exposure_of(doc_events))) {
      c.check(false, fmt::format("mutation {} document: {}", m, *leak));
      return o;
    }
    ++mutations;
  }
  c.check(withheld >= attempts, fmt::format("{} of {} smuggling attempts withheld", withheld, attempts));
  if (o.ok) {
    o.detail = fmt::format("{} golden steps, {} mutations ({} smuggling attempts, {} withheld), 0 leaks",
                           goldens, mutations, attempts, withheld);
  }
  return o;
}

// ------------------------------------------------------------------ analytics

records::UsageRecord rated(FeatureKind f, const std::string& version, std::optional<int> stars, int serial) {
  records::UsageRecord r;
  r.query.id = fmt::format("q-{}", serial);
  r.query.user = fmt::format("u{}", serial % 97);
  r.query.feature = f;
  r.query.version = version;
  r.query.created_at = parse_timestamp("2024-01-08T10:00:00Z") + std::chrono::hours(serial % 2000);
  r.response.id = fmt::format("r-{}", serial);
  r.response.query_id = r.query.id;
  if (stars) r.rating = records::Rating{*stars, "", r.query.created_at};
  return r;
}

Outcome analytics_reproduction() {
  Outcome o;
  Criterion c(o);
  // Count fixtures: total labeled, correct, helpful among correct.
  struct Counts {
    std::size_t total, correct, helpful;
    std::string correct_pct, helpful_pct;
  };
  const std::vector<Counts> counts = {{1749, 1386, 1196, "79%", "86%"},
                                      {1057, 781, 646, "74%", "83%"},
                                      {692, 603, 550, "87%", "91%"}};
  for (const auto& k : counts) {
    std::vector<records::UsageRecord> labeled;
    for (std::size_t i = 0; i < k.total; ++i) {
      auto r = rated(FeatureKind::GeneralQuestion, "v1", std::nullopt, static_cast<int>(i));
      records::CoderLabels l;
      l.coder_id = "c1";
      if (i >= k.correct) {
        l.correctness = records::Correctness::Incorrect;
        l.helpfulness = records::Helpfulness::NotApplicable;
      } else {
        l.helpfulness = i < k.helpful ? records::Helpfulness::Helpful : records::Helpfulness::NotHelpful;
      }
      r.labels.push_back(l);
      labeled.push_back(std::move(r));
    }
    const auto report = analytics::quality_rates(labeled);
    c.check(report.correctness.render() == k.correct_pct,
            fmt::format("{}/{} rendered {}", k.correct, k.total, report.correctness.render()));
    c.check(report.helpfulness_given_correct.render() == k.helpful_pct,
            fmt::format("{}/{} rendered {}", k.helpful, k.correct, report.helpfulness_given_correct.render()));
  }

  // Synthetic log with the published star distributions per feature and
  // version; the table row shape and every number are checked.
  struct Row {
    FeatureKind f;
    std::vector<int> v1, v2;  // counts of 1..5 stars
  };
  const std::vector<Row> rows = {
      {FeatureKind::GeneralQuestion, {188, 64, 160, 403, 833}, {101, 70, 35, 249, 579}},
      {FeatureKind::QuestionFromCode, {367, 102, 304, 242, 511}, {104, 31, 86, 68, 144}},
      {FeatureKind::HelpFixCode, {428, 166, 269, 109, 376}, {108, 52, 50, 0, 53}},
      {FeatureKind::ExplainCode, {19, 32, 0, 69, 176}, {0, 16, 6, 17, 53}},
      {FeatureKind::HelpWriteCode, {24, 5, 18, 12, 39}, {40, 19, 37, 33, 56}},
  };
  std::vector<records::UsageRecord> log;
  int serial = 0;
  // Rows as published.
  std::map<std::string, std::string> expected_rows = {
      {"General Question", "General Question | 1648 | M=3.99, SD=1.34 | 1034 | M=4.10, SD=1.32"},
      {"Question from Code", "Question from Code | 1526 | M=3.28, SD=1.57 | 433 | M=3.27, SD=1.57"},
      {"Help Fix Code", "Help Fix Code | 1348 | M=2.88, SD=1.61 | 263 | M=2.38, SD=1.51"},
      {"Explain Code", "Explain Code | 296 | M=4.19, SD=1.26 | 92 | M=4.16, SD=1.15"},
      {"Help Write Code", "Help Write Code | 98 | M=3.38, SD=1.62 | 185 | M=3.25, SD=1.52"},
  };
  const auto moments = [](const std::vector<int>& hist) {
    long double n = 0, sum = 0, sq = 0;
    for (int s = 1; s <= 5; ++s) {
      n += hist[s - 1];
      sum += static_cast<long double>(s) * hist[s - 1];
    }
    const auto mean = sum / n;
    for (int s = 1; s <= 5; ++s) sq += hist[s - 1] * (s - mean) * (s - mean);
    return std::pair<double, double>(static_cast<double>(mean), static_cast<double>(std::sqrt(sq / (n - 1))));
  };
  for (const auto& row : rows) {
    std::string line = std::string(display_name(row.f));
    for (const auto* hist : {&row.v1, &row.v2}) {
      const std::string version = hist == &row.v1 ? "v1" : "v2";
      int count = 0;
      for (int s = 1; s <= 5; ++s) {
        for (int k = 0; k < (*hist)[s - 1]; ++k, ++count) log.push_back(rated(row.f, version, s, serial++));
      }
      const auto [mean, sd] = moments(*hist);
      line += fmt::format(" | {} | M={:.2f}, SD={:.2f}", count, mean, sd);
    }
    // Independent moments route agrees with the published row.
    c.check(line == expected_rows[std::string(display_name(row.f))], "moments oracle: " + line);
  }
  const auto table = analytics::render_usage_table(analytics::feature_usage_stats(log), {"v1", "v2"});
  const auto lines = text::split_lines(table);
  c.check(!lines.empty() && lines[0] == "Feature Type | Count V1 | Rating V1 | Count V2 | Rating V2",
          "table header differs");
  const std::regex shape(R"(^[A-Za-z -]+ \| \d+ \| M=\d\.\d\d, SD=\d\.\d\d \| \d+ \| M=\d\.\d\d, SD=\d\.\d\d$)");
  std::size_t matched = 0;
  for (const auto& l : lines) {
    const auto name = l.substr(0, l.find(" | "));
    if (!expected_rows.count(name)) continue;
    c.check(std::regex_match(l, shape), "row shape: " + l);
    c.check(l == expected_rows[name], "row values: " + l + " vs " + expected_rows[name]);
    ++matched;
  }
  c.check(matched == rows.size(), fmt::format("{} of {} feature rows present", matched, rows.size()));
  if (o.ok) o.detail = "six published rates and five table rows reproduced";
  return o;
}

// ------------------------------------------------------------------ kappa

Outcome kappa_vectors() {
  Outcome o;
  Criterion c(o);
  const auto expand = [](const std::vector<std::vector<int>>& m) {
    std::pair<std::vector<std::string>, std::vector<std::string>> ab;
    for (std::size_t i = 0; i < m.size(); ++i) {
      for (std::size_t j = 0; j < m[i].size(); ++j) {
        for (int k = 0; k < m[i][j]; ++k) {
          ab.first.push_back("c" + std::to_string(i));
          ab.second.push_back("c" + std::to_string(j));
        }
      }
    }
    return ab;
  };
  // Formula oracle over the confusion matrix.
  const auto formula = [](const std::vector<std::vector<int>>& m) {
    long double n = 0, diag = 0;
    std::vector<long double> rows(m.size()), cols(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
      for (std::size_t j = 0; j < m.size(); ++j) {
        n += m[i][j];
        rows[i] += m[i][j];
        cols[j] += m[i][j];
        if (i == j) diag += m[i][j];
      }
    }
    long double pe = 0;
    for (std::size_t i = 0; i < m.size(); ++i) pe += rows[i] * cols[i] / (n * n);
    return static_cast<double>((diag / n - pe) / (1 - pe));
  };
  struct Case {
    std::string name;
    std::vector<std::vector<int>> m;
    double want;
  };
  const std::vector<Case> cases = {
      {"perfect", {{12, 0, 0}, {0, 7, 0}, {0, 0, 9}}, 1.0},
      {"independent 2x2", {{10, 10}, {10, 10}}, 0.0},
      {"2x2 hand", {{20, 5}, {10, 15}}, 0.4},
      {"3x3 hand", {{25, 2, 3}, {3, 20, 2}, {1, 4, 40}}, 991.0 / 1291.0},
      {"2x2 below chance", {{5, 15}, {10, 0}}, -2.0 / 3.0},
  };
  for (const auto& k : cases) {
    const auto [a, b] = expand(k.m);
    const auto r = analytics::inter_rater(a, b);
    if (!c.check(r.kappa.has_value(), k.name + ": no kappa")) continue;
    c.check(std::abs(*r.kappa - k.want) <= kKappaTolerance,
            fmt::format("{}: {} vs hand value {}", k.name, *r.kappa, k.want));
    c.check(std::abs(*r.kappa - formula(k.m)) <= kKappaTolerance,
            fmt::format("{}: {} vs formula {}", k.name, *r.kappa, formula(k.m)));
  }
  if (o.ok) o.detail = fmt::format("{} vectors within {:g}", cases.size(), kKappaTolerance);
  return o;
}

// ------------------------------------------------------------------ state machine

Outcome state_machine(const Services& svc) {
  Outcome o;
  Criterion c(o);
  auto now = std::make_shared<Timestamp>(parse_timestamp("2024-03-04T09:00:00Z"));
  service::TutorOptions options;
  service::Tutor tutor({svc.library, std::make_shared<testkit::UniversalProvider>(), svc.docs, {},
                        [now] { return *now; }},
                       options);
  const std::vector<service::Identity> people = {{"t1", "u1", service::Role::Student},
                                                 {"t2", "u2", service::Role::Student},
                                                 {"t3", "u3", service::Role::Student}};
  std::map<std::string, std::vector<Timestamp>> admitted;
  std::mt19937 rng(10000);
  std::size_t accepted = 0, gated = 0, throttled = 0;
  const auto unrated_count = [&](const std::string& user) {
    std::size_t n = 0;
    for (const auto& r : tutor.records()) n += r.query.user == user && !r.rating;
    return n;
  };
  for (std::size_t op = 0; op < kStateMachineOps; ++op) {
    const auto& who = people[rng() % people.size()];
    const auto kind = rng() % 10;
    if (kind < 5) {
      service::QueryInput in;
      in.feature = FeatureKind::GeneralQuestion;
      in.question = "How do loops stop?";
      try {
        tutor.submit_query(who, in);
        admitted[who.session].push_back(*now);
        ++accepted;
      } catch (const service::ThrottledError&) {
        ++throttled;
      } catch (const Error& e) {
        if (!c.check(e.code() == ErrorCode::RatingRequired, std::string("unexpected ") + e.what())) return o;
        ++gated;
      }
    } else if (kind < 8) {
      if (const auto id = tutor.pending_rating(who); id && rng() % 2) {
        tutor.rate_response(who, *id, 1 + static_cast<int>(rng() % 5));
      }
    } else {
      *now += std::chrono::seconds(rng() % (kind == 9 && rng() % 8 == 0 ? 6000 : 30));
    }
    if (op % 97 == 0 || kind < 5) {
      if (!c.check(unrated_count(who.user) <= 1, fmt::format("op {}: two unrated responses", op))) return o;
    }
  }
  for (const auto& [session, times] : admitted) {
    for (std::size_t a = 0; a < times.size(); ++a) {
      for (std::size_t b = a; b < times.size(); ++b) {
        const double hours = std::chrono::duration<double>(times[b] - times[a]).count() / 3600.0;
        if (!c.check(static_cast<double>(b - a + 1) <= options.throttle.capacity + options.throttle.refill_per_hour * hours + 1e-9,
                     fmt::format("{} exceeded the bucket", session))) {
          return o;
        }
      }
    }
  }
  c.check(accepted > 0 && gated > 0 && throttled > 0, "interleaving never exercised every path");
  if (o.ok) {
    o.detail = fmt::format("{} operations: {} admitted, {} gated, {} throttled", kStateMachineOps,
                           accepted, gated, throttled);
  }
  return o;
}

// ------------------------------------------------------------------ transcripts

Outcome golden_transcripts(const Services& svc) {
  Outcome o;
  Criterion c(o);
  const auto dirs = cli::fixture_dirs(testkit::fixtures("transcripts"));
  c.check(dirs.size() >= kMinTranscripts, fmt::format("{} transcripts", dirs.size()));
  std::set<std::string> seen;
  for (const auto& d : dirs) {
    const auto fixture = cli::load_fixture(d);
    const auto table = gateway::ScriptTable::load(d / "script.json");
    const auto a = cli::run_transcript(fixture, *svc.library, *svc.docs, gateway::scripted_provider(table));
    const auto b = cli::run_transcript(fixture, *svc.library, *svc.docs, gateway::scripted_provider(table));
    c.check(a == b, fixture.name + " differs between runs");
    c.check(a == text::read_file(d / "expected.txt"), fixture.name + " differs from expected.txt");
    for (const auto& step : fixture.spec["steps"]) {
      if (step["op"] == "followup") seen.insert("follow-up");
      if (step["op"] == "query") {
        const auto f = step["input"]["feature"].get<std::string>();
        seen.insert(f);
        if (f == "inline-exploration") seen.insert(step["input"]["subkind"].get<std::string>());
      }
    }
    if (a.find("\"finish\":\"refused\"") != std::string::npos) seen.insert("refusal");
    if (a.find("\"finish\":\"truncated\"") != std::string::npos) seen.insert("truncation");
    if (a.find("\"section\":\"annotated\",\"tag\":\"changed\"") != std::string::npos) seen.insert("annotation");
  }
  for (const auto* need : {"general-question", "question-from-code", "explain-code", "help-fix-code",
                           "help-write-code", "inline-exploration", "example-code", "documentation",
                           "ask-question", "follow-up", "refusal", "truncation", "annotation"}) {
    c.check(seen.count(need) == 1, std::string("no transcript covers ") + need);
  }
  if (o.ok) o.detail = fmt::format("{} transcripts byte-stable, all cases covered", dirs.size());
  return o;
}

// ------------------------------------------------------------------ offline

Outcome offline_suite(const Services& svc) {
  Outcome o;
  Criterion c(o);
  // The only network peer the suite uses is the loopback stub.
  testkit::StubLlmServer stub;
  c.check(stub.endpoint().rfind("http://127.0.0.1:", 0) == 0, "stub is not on loopback");
  stub.set_deltas({"// [answer]: Loops stop when ", "their condition is false.\n", "// [end]\n"});
  gateway::HttpProviderConfig cfg;
  cfg.endpoint = stub.endpoint();
  cfg.model = "stub";
  const auto provider = std::make_shared<gateway::HttpProvider>(cfg);
  service::Tutor tutor({svc.library, provider, svc.docs, {}, {}}, {});
  service::QueryInput in;
  in.feature = FeatureKind::GeneralQuestion;
  in.question = "When does a loop stop?";
  try {
    const auto doc = tutor.submit_query({"s", "u", service::Role::Student}, in);
    const auto* answer = doc.text_of("answer");
    c.check(answer && answer->text == "Loops stop when their condition is false.", "stub answer lost");
  } catch (const std::exception& e) {
    c.check(false, std::string("loopback run failed: ") + e.what());
  }
  // Suggestions ran against the stub too: two requests, both local.
  c.check(stub.requests() >= 1, "stub was not called");
  // Data the suite needs ships with the repository.
  c.check(fs::exists(testkit::repo_data("docs/store.json")), "bundled doc store missing");
  c.check(fs::exists(testkit::repo_data("prompts/grammar.json")), "bundled grammar missing");
  if (o.ok) {
    o.detail = fmt::format("scripted providers plus a loopback stub ({} requests); no UI target needed",
                           stub.requests());
  }
  return o;
}

}  // namespace

int main() {
  const Services svc;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"stream-parser chunking invariance", chunking_invariance},
      {"line-matching optimality", matching_optimality},
      {"guardrail leak scan", [&] { return guardrail_scan(svc); }},
      {"analytics reproduction", analytics_reproduction},
      {"inter-rater kappa vectors", kappa_vectors},
      {"rating gate and throttle state machine", [&] { return state_machine(svc); }},
      {"golden transcripts", [&] { return golden_transcripts(svc); }},
      {"offline primary suite", [&] { return offline_suite(svc); }},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.ok ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failed += !o.ok;
  }
  return failed;
}
