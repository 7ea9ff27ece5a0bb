#include "transcript.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "tutorforge/core/error.hpp"
#include "tutorforge/gateway/scripted.hpp"
#include "tutorforge/records/render.hpp"
#include "tutorforge/records/wire.hpp"
#include "tutorforge/service/tutor.hpp"

namespace tutorforge::cli {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
}

service::Identity identity(const std::string& user) {
  const auto role = user == "admin" ? service::Role::Admin : service::Role::Student;
  return {"tok-" + user, user, role};
}

std::string first_difference(const std::string& want, const std::string& got) {
  std::istringstream a(want), b(got);
  std::string la, lb;
  for (int line = 1;; ++line) {
    const bool ha = static_cast<bool>(std::getline(a, la));
    const bool hb = static_cast<bool>(std::getline(b, lb));
    if (!ha && !hb) return "outputs differ in trailing bytes";
    if (!ha || !hb || la != lb) {
      return fmt::format("line {}: expected \"{}\", got \"{}\"", line, ha ? la : "<end>",
                         hb ? lb : "<end>");
    }
  }
}

}  // namespace

Fixture load_fixture(const std::filesystem::path& dir) {
  Fixture f{dir.filename().string(), dir, {}};
  try {
    f.spec = json::parse(read_file(dir / "fixture.json"));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, (dir / "fixture.json").string() + ": " + e.what());
  }
  if (!f.spec.contains("steps") || !f.spec["steps"].is_array()) {
    throw Error(ErrorCode::ConfigError, f.name + ": fixture needs a steps array");
  }
  return f;
}

std::string run_transcript(const Fixture& fixture, const prompts::PromptLibrary& library,
                           const scaffold::DocStore& docs,
                           std::shared_ptr<const gateway::Provider> provider) {
  auto now = std::make_shared<Timestamp>(parse_timestamp("2024-03-04T09:00:00Z"));
  service::TutorOptions options;
  if (fixture.spec.contains("max_output_tokens")) {
    options.max_output_tokens = fixture.spec["max_output_tokens"].get<int>();
  }
  service::Tutor tutor({std::make_shared<prompts::PromptLibrary>(library), std::move(provider),
                        std::make_shared<scaffold::DocStore>(docs), {}, [now] { return *now; }},
                       options);

  std::string out;
  std::vector<std::string> step_response;  // response id per step, empty if none
  const auto response_of = [&](const json& step, const char* key) {
    const auto n = step.at(key).get<std::size_t>();
    if (n == 0 || n > step_response.size() || step_response[n - 1].empty()) {
      return fmt::format("r-step{}", n);  // deliberately unknown
    }
    return step_response[n - 1];
  };

  std::size_t number = 0;
  for (const auto& step : fixture.spec["steps"]) {
    ++number;
    *now += std::chrono::minutes(1);
    const auto op = step.at("op").get<std::string>();
    const auto who = identity(step.value("as", std::string("alice")));
    step_response.emplace_back();
    std::string body;
    const service::WireSink sink = [&](const records::WireEvent& e) {
      body += records::encode_wire(e);
    };
    try {
      if (op == "query" || op == "followup") {
        records::ResponseDocument doc;
        if (op == "query") {
          const auto input = service::query_input_from_json(step.at("input"));
          out += fmt::format("### step {}: query {} as {}\n", number, to_string(input.feature), who.user);
          doc = tutor.submit_query(who, input, sink);
        } else {
          const auto parent = response_of(step, "parent");
          out += fmt::format("### step {}: followup on {} as {}\n", number, parent, who.user);
          doc = tutor.submit_followup(who, parent, step.at("question").get<std::string>(), sink);
        }
        step_response.back() = doc.id;
        out += body;
        out += "--- rendered\n" + records::render_text(doc);
        if (!out.ends_with('\n')) out += '\n';
      } else if (op == "rate") {
        const auto id = response_of(step, "response");
        const auto stars = step.at("stars").get<int>();
        out += fmt::format("### step {}: rate {} with {} as {}\n", number, id, stars, who.user);
        tutor.rate_response(who, id, stars, step.value("reason", std::string()));
        out += "rated\n";
      } else {
        throw Error(ErrorCode::ConfigError, fmt::format("step {}: unknown op '{}'", number, op));
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ConfigError) throw;
      out += body;
      out += fmt::format("error: {}: {}\n", to_string(e.code()), e.what());
    }
  }
  return out;
}

ReplayOutcome replay_fixture(const std::filesystem::path& dir, const prompts::PromptLibrary& library,
                             const scaffold::DocStore& docs, bool bless) {
  const auto fixture = load_fixture(dir);
  ReplayOutcome outcome{fixture.name, true, {}};
  if (bless) {
    std::vector<gateway::ScriptEntry> queue;
    for (const auto& c : fixture.spec.value("completions", json::array())) {
      if (c.is_string()) {
        queue.push_back({c.get<std::string>(), {}});
      } else {
        queue.push_back({c.at("completion").get<std::string>(),
                         c.value("splits", std::vector<std::size_t>{})});
      }
    }
    auto provider = std::make_shared<gateway::SequentialProvider>(queue);
    const auto text = run_transcript(fixture, library, docs, provider);
    if (provider->remaining() != 0) {
      outcome.ok = false;
      outcome.detail = fmt::format("{} completions were never requested", provider->remaining());
      return outcome;
    }
    write_file(dir / "script.json", provider->recorded().to_json_text());
    write_file(dir / "expected.txt", text);
    outcome.detail = "blessed";
    return outcome;
  }
  const auto provider = gateway::scripted_provider(gateway::ScriptTable::load(dir / "script.json"));
  const auto got = run_transcript(fixture, library, docs, provider);
  const auto want = read_file(dir / "expected.txt");
  if (got != want) {
    outcome.ok = false;
    outcome.detail = first_difference(want, got);
  }
  return outcome;
}

std::vector<std::filesystem::path> fixture_dirs(const std::filesystem::path& root) {
  std::vector<std::filesystem::path> out;
  if (std::filesystem::exists(root / "fixture.json")) return {root};
  if (!std::filesystem::is_directory(root)) {
    throw Error(ErrorCode::IoError, "no transcript directory " + root.string());
  }
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    if (entry.is_directory() && std::filesystem::exists(entry.path() / "fixture.json")) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace tutorforge::cli
