#include "cli.hpp"

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "transcript.hpp"
#include "tutorforge/analytics/dataset.hpp"
#include "tutorforge/analytics/quality.hpp"
#include "tutorforge/analytics/stats.hpp"
#include "tutorforge/core/error.hpp"
#include "tutorforge/gateway/scripted.hpp"
#include "tutorforge/records/render.hpp"
#include "tutorforge/service/config.hpp"
#include "tutorforge/service/http_server.hpp"
#include "tutorforge/service/tutor.hpp"

#ifndef TUTORFORGE_DATA_DIR
#define TUTORFORGE_DATA_DIR "data"
#endif

namespace tutorforge::cli {

using nlohmann::json;

namespace {

/// Input problems found after parsing the flags; exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
}

std::string salt_from_env() {
  const char* salt = std::getenv(service::kSaltVariable);
  return salt ? salt : "";
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream s(text);
  for (std::string item; std::getline(s, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

service::ServiceConfig config_for(const std::string& config_path, const std::string& data_dir) {
  if (config_path.empty()) return service::default_config(data_dir);
  return service::load_config(config_path, data_dir);
}

std::shared_ptr<const scaffold::DocStore> docstore_for(const service::ServiceConfig& cfg,
                                                       const std::filesystem::path& data_dir) {
  if (std::filesystem::exists(cfg.docstore)) {
    return std::make_shared<scaffold::DocStore>(scaffold::load_docstore(cfg.docstore));
  }
  // A fresh checkout has only the corpus; build the store in memory.
  return std::make_shared<scaffold::DocStore>(scaffold::build_docstore(data_dir / "docs" / "corpus"));
}

struct AskArgs {
  std::string feature, subkind, question, code_file, intent, script, config, format = "text";
  std::optional<int> max_tokens;
};

int cmd_ask(const AskArgs& a, const std::string& data_dir, std::ostream& out) {
  const auto kind = parse_feature(a.feature);
  if (!kind) throw UsageError("unknown feature '" + a.feature + "'");
  service::QueryInput input;
  input.feature = *kind;
  if (!a.subkind.empty()) {
    input.subkind = parse_inline_subkind(a.subkind);
    if (!input.subkind) throw UsageError("unknown subkind '" + a.subkind + "'");
  }
  if (!a.question.empty()) input.question = a.question;
  if (!a.intent.empty()) input.intended_behavior = a.intent;
  if (!a.code_file.empty()) input.code = read_file(a.code_file);
  if (kind == FeatureKind::FollowUp) throw UsageError("ask cannot start a follow-up; it has no parent");

  auto cfg = config_for(a.config, data_dir);
  if (a.max_tokens) cfg.max_output_tokens = *a.max_tokens;
  try {
    service::check_input(input, cfg.limits);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  std::shared_ptr<const gateway::Provider> provider;
  if (!a.script.empty()) {
    provider = gateway::scripted_provider(gateway::ScriptTable::load(a.script));
  } else if (!a.config.empty()) {
    provider = service::make_provider(cfg.provider);
  } else {
    throw UsageError("ask needs --script or --config to choose a provider");
  }
  auto library = std::make_shared<prompts::PromptLibrary>(prompts::PromptLibrary::load(cfg.prompts_dir, cfg.limits));
  service::TutorOptions options;
  options.max_output_tokens = cfg.max_output_tokens;
  options.version = cfg.version;
  // Fixed clock keeps scripted runs byte-identical.
  service::Tutor tutor({library, provider, docstore_for(cfg, data_dir), {},
                        [] { return parse_timestamp("2024-03-04T09:00:00Z"); }},
                       options);
  std::vector<records::WireEvent> events;
  const auto doc = tutor.submit_query({"cli", "cli", service::Role::Student}, input,
                                      [&](const records::WireEvent& e) { events.push_back(e); });
  if (a.format == "json") {
    json ev = json::array();
    for (const auto& e : events) ev.push_back(records::to_json(e));
    out << json{{"document", records::to_json(doc)}, {"events", ev}}.dump(2) << "\n";
  } else {
    out << records::render_text(doc);
  }
  return kExitOk;
}

service::HttpServer* g_server = nullptr;

int cmd_serve(const std::string& config, const std::string& data_dir, std::ostream& out) {
  const auto cfg = config_for(config, data_dir);
  if (cfg.credentials.empty()) throw UsageError("serve needs paths.credentials in the config");
  auto credentials = service::Credentials::load(cfg.credentials);
  auto library = std::make_shared<prompts::PromptLibrary>(prompts::PromptLibrary::load(cfg.prompts_dir, cfg.limits));
  service::TutorOptions options;
  options.throttle = cfg.throttle;
  options.max_output_tokens = cfg.max_output_tokens;
  options.version = cfg.version;
  options.utc_offset_minutes = cfg.utc_offset_minutes;
  options.smoothing_window = cfg.smoothing_window;
  options.pseudonym_salt = salt_from_env();
  if (options.pseudonym_salt.empty()) {
    spdlog::warn("{} is not set; admin statistics use unsalted pseudonyms", service::kSaltVariable);
  }
  service::Tutor tutor({library, service::make_provider(cfg.provider), docstore_for(cfg, data_dir),
                        cfg.log, {}},
                       options);
  service::HttpServer server(tutor, std::move(credentials));
  const int port = server.bind(cfg.host, cfg.port);
  out << fmt::format("listening on http://{}:{}\n", cfg.host, port) << std::flush;
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });
  const bool ok = server.run();
  g_server = nullptr;
  return ok ? kExitOk : kExitRuntime;
}

int cmd_replay(const std::string& dir, bool bless, const std::string& data_dir, std::ostream& out) {
  const auto cfg = service::default_config(data_dir);
  const auto library = prompts::PromptLibrary::load(cfg.prompts_dir, cfg.limits);
  const auto docs = docstore_for(cfg, data_dir);
  int failures = 0;
  const auto dirs = fixture_dirs(dir);
  if (dirs.empty()) throw UsageError("no fixtures under " + dir);
  for (const auto& d : dirs) {
    const auto r = replay_fixture(d, library, *docs, bless);
    if (r.ok) {
      out << (bless ? "blessed " : "ok ") << r.name << "\n";
    } else {
      ++failures;
      out << "FAIL " << r.name << ": " << r.detail << "\n";
    }
  }
  out << fmt::format("{} of {} transcripts match\n", dirs.size() - failures, dirs.size());
  return failures == 0 ? kExitOk : kExitRuntime;
}

struct StatsArgs {
  std::string log, versions, summary, version, field = "category", out_file, file, salt_mode = "pseudonymize";
  std::size_t window = 7;
  int utc_offset = 0;
};

std::vector<records::UsageRecord> load_records(const std::string& path) {
  if (path.empty()) throw UsageError("--log is required");
  return records::load_log(path);
}

void maybe_summary(const StatsArgs& a, const json& j) {
  if (!a.summary.empty()) write_file(a.summary, j.dump(2) + "\n");
}

int cmd_stats_usage(const StatsArgs& a, std::ostream& out) {
  const auto recs = analytics::anonymized(load_records(a.log), {analytics::Redaction::Pseudonymize, salt_from_env()});
  const auto stats = analytics::feature_usage_stats(recs, {a.window, a.utc_offset});
  auto versions = split_list(a.versions);
  if (versions.empty()) {
    std::set<std::string> seen;
    for (const auto& f : stats.features) seen.insert(f.version);
    versions.assign(seen.begin(), seen.end());
  }
  out << analytics::render_usage_table(stats, versions);
  maybe_summary(a, analytics::to_json(stats));
  return kExitOk;
}

int cmd_stats_quality(const StatsArgs& a, std::ostream& out) {
  const auto report = analytics::quality_rates(
      load_records(a.log), a.version.empty() ? std::nullopt : std::optional(a.version));
  out << analytics::render_quality(report);
  const auto p = analytics::pseudocode_breakdown(report);
  out << fmt::format("pseudo-code: {} total, {} high-level, {} specific, residual {} points\n",
                     p.total.count, p.high_level.count, p.specific.count, p.residual_points);
  maybe_summary(a, analytics::to_json(report));
  return kExitOk;
}

std::string label_field(const records::CoderLabels& l, const std::string& field) {
  if (field == "category") return std::string(records::to_string(l.query_category));
  if (field == "directness") return std::string(records::to_string(l.directness));
  if (field == "correctness") return std::string(records::to_string(l.correctness));
  if (field == "helpfulness") return std::string(records::to_string(l.helpfulness));
  throw UsageError("unknown field '" + field + "'");
}

int cmd_stats_kappa(const StatsArgs& a, std::ostream& out) {
  std::vector<std::string> first, second;
  for (const auto& r : load_records(a.log)) {
    if (r.labels.size() < 2) continue;
    first.push_back(label_field(r.labels[0], a.field));
    second.push_back(label_field(r.labels[1], a.field));
  }
  const auto agreement = analytics::inter_rater(first, second);
  out << fmt::format("{}: n={}, agreement={:.3f}, kappa={}\n", a.field, first.size(),
                     agreement.percent_agreement,
                     agreement.kappa ? fmt::format("{:.2f}", *agreement.kappa) : "undefined");
  maybe_summary(a, {{"field", a.field},
                    {"n", first.size()},
                    {"percent_agreement", agreement.percent_agreement},
                    {"kappa", agreement.kappa ? json(*agreement.kappa) : json(nullptr)}});
  return kExitOk;
}

int cmd_stats_export(const StatsArgs& a, std::ostream& out) {
  if (a.out_file.empty()) throw UsageError("--out is required");
  analytics::ExportPolicy policy;
  if (a.salt_mode == "drop") {
    policy.redaction = analytics::Redaction::DropUser;
  } else if (a.salt_mode != "pseudonymize") {
    throw UsageError("--redaction must be pseudonymize or drop");
  }
  policy.salt = salt_from_env();
  const auto recs = load_records(a.log);
  write_file(a.out_file, analytics::export_dataset(recs, policy));
  out << fmt::format("exported {} records to {}\n", recs.size(), a.out_file);
  return kExitOk;
}

int cmd_stats_import(const StatsArgs& a, std::ostream& out) {
  if (a.file.empty()) throw UsageError("import needs a dataset file");
  const auto recs = analytics::import_dataset(read_file(a.file));
  const auto stats = analytics::feature_usage_stats(recs, {a.window, a.utc_offset});
  std::set<std::string> seen;
  for (const auto& f : stats.features) seen.insert(f.version);
  out << fmt::format("{} records\n", recs.size());
  out << analytics::render_usage_table(stats, {seen.begin(), seen.end()});
  maybe_summary(a, analytics::to_json(stats));
  return kExitOk;
}

int cmd_docstore(const std::string& action, const std::string& corpus, const std::string& store,
                 std::ostream& out) {
  if (action == "build") {
    if (corpus.empty() || store.empty()) throw UsageError("docstore build needs --corpus and --out");
    const auto built = scaffold::build_docstore(corpus);
    scaffold::save_docstore(built, store);
    out << fmt::format("wrote {} functions to {}\n", built.size(), store);
    return kExitOk;
  }
  // validate: a corpus, a store, or both (then they must agree)
  if (corpus.empty() && store.empty()) throw UsageError("docstore validate needs --corpus or --store");
  std::optional<scaffold::DocStore> from_corpus, from_store;
  if (!corpus.empty()) from_corpus = scaffold::build_docstore(corpus);
  if (!store.empty()) from_store = scaffold::load_docstore(store);
  if (from_corpus && from_store && !(*from_corpus == *from_store)) {
    out << "store is out of date with the corpus; rebuild it\n";
    return kExitRuntime;
  }
  out << fmt::format("ok: {} functions\n", (from_store ? *from_store : *from_corpus).size());
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"tutorforge: programming tutor service and tools"};
  app.require_subcommand(1);
  std::string data_dir = TUTORFORGE_DATA_DIR;
  if (const char* env = std::getenv("TUTORFORGE_DATA_DIR")) data_dir = env;
  app.add_option("--data-dir", data_dir, "Directory holding prompts/ and docs/");

  std::string serve_config;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--config", serve_config, "Service configuration (JSON)")->required();

  AskArgs ask_args;
  auto* ask = app.add_subcommand("ask", "One query, printed as text");
  ask->add_option("--feature", ask_args.feature, "Feature id, e.g. explain-code")->required();
  ask->add_option("--subkind", ask_args.subkind, "Inline exploration kind");
  ask->add_option("--question", ask_args.question);
  ask->add_option("--code-file", ask_args.code_file)->check(CLI::ExistingFile);
  ask->add_option("--intent", ask_args.intent, "Intended behavior, for help-fix-code");
  ask->add_option("--script", ask_args.script, "Scripted provider table")->check(CLI::ExistingFile);
  ask->add_option("--config", ask_args.config, "Service configuration (JSON)")->check(CLI::ExistingFile);
  ask->add_option("--max-tokens", ask_args.max_tokens);
  ask->add_option("--format", ask_args.format)->check(CLI::IsMember({"text", "json"}));

  std::string replay_dir;
  bool bless = false;
  auto* replay = app.add_subcommand("replay", "Re-run golden transcripts");
  replay->add_option("dir", replay_dir, "Transcript directory")->required();
  replay->add_flag("--bless", bless, "Rewrite expected output from the completions queue");

  StatsArgs stats_args;
  auto* stats = app.add_subcommand("stats", "Analytics over a usage log");
  stats->require_subcommand(1);
  const auto common = [&](CLI::App* c) {
    c->add_option("--summary", stats_args.summary, "Write a JSON summary here");
  };
  auto* usage = stats->add_subcommand("usage", "Feature usage table");
  usage->add_option("--log", stats_args.log)->required();
  usage->add_option("--versions", stats_args.versions, "Comma-separated version columns");
  usage->add_option("--window", stats_args.window)->check(CLI::PositiveNumber);
  usage->add_option("--utc-offset", stats_args.utc_offset, "Minutes east of UTC");
  common(usage);
  auto* quality = stats->add_subcommand("quality", "Correctness, helpfulness and shares");
  quality->add_option("--log", stats_args.log)->required();
  quality->add_option("--version", stats_args.version);
  common(quality);
  auto* kappa = stats->add_subcommand("kappa", "Agreement of the first two coders");
  kappa->add_option("--log", stats_args.log)->required();
  kappa->add_option("--field", stats_args.field)
      ->check(CLI::IsMember({"category", "directness", "correctness", "helpfulness"}));
  common(kappa);
  auto* exp = stats->add_subcommand("export", "Anonymized dataset");
  exp->add_option("--log", stats_args.log)->required();
  exp->add_option("--out", stats_args.out_file)->required();
  exp->add_option("--redaction", stats_args.salt_mode)->check(CLI::IsMember({"pseudonymize", "drop"}));
  auto* imp = stats->add_subcommand("import", "Read a dataset and report its usage");
  imp->add_option("file", stats_args.file)->required()->check(CLI::ExistingFile);
  common(imp);

  std::string docs_action, corpus, store;
  auto* docstore = app.add_subcommand("docstore", "Build or validate the function doc store");
  docstore->add_option("action", docs_action)->required()->check(CLI::IsMember({"build", "validate"}));
  docstore->add_option("--corpus", corpus, "Corpus directory");
  docstore->add_option("--out,--store", store, "Store file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*serve) return cmd_serve(serve_config, data_dir, out);
    if (*ask) return cmd_ask(ask_args, data_dir, out);
    if (*replay) return cmd_replay(replay_dir, bless, data_dir, out);
    if (*usage) return cmd_stats_usage(stats_args, out);
    if (*quality) return cmd_stats_quality(stats_args, out);
    if (*kappa) return cmd_stats_kappa(stats_args, out);
    if (*exp) return cmd_stats_export(stats_args, out);
    if (*imp) return cmd_stats_import(stats_args, out);
    if (*docstore) return cmd_docstore(docs_action, corpus, store, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace tutorforge::cli
