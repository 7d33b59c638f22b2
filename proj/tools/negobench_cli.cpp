// negobench: generate suites, run episodes, score and report transcripts.
// Exit codes: 0 success, 1 usage, 2 runtime (including transport failures).

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "negobench/negobench.hpp"

namespace fs = std::filesystem;
using namespace negobench;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::map<std::string, Game> kGames = {{"dond", Game::dond}, {"cleanup", Game::cleanup}, {"balloon", Game::balloon}};
const std::map<std::string, Locale> kLocales = {{"en", Locale::en}, {"de", Locale::de}, {"it", Locale::it}};

// "a,b" names one agent per seat, a single spec serves both. A spec is a
// script id (optionally "script:"-prefixed) or a JSON file holding one
// AgentConfig or an array of two.
std::array<AgentConfig, 2> parse_agents(const std::string& spec) {
  if (spec.size() > 5 && spec.compare(spec.size() - 5, 5, ".json") == 0) {
    std::ifstream in(spec);
    if (!in) throw UsageError("cannot read agent file " + spec);
    json j;
    try {
      in >> j;
      std::array<AgentConfig, 2> out;
      if (j.is_array()) {
        if (j.size() != 2) throw UsageError("agent file must hold one config or two");
        out = {j[0].get<AgentConfig>(), j[1].get<AgentConfig>()};
      } else {
        out = {j.get<AgentConfig>(), j.get<AgentConfig>()};
      }
      for (const auto& a : out) a.validate();
      return out;
    } catch (const json::exception& e) {
      throw UsageError("malformed agent file " + spec + ": " + e.what());
    } catch (const InvalidInput& e) {
      throw UsageError(e.what());
    }
  }
  const auto comma = spec.find(',');
  try {
    if (comma == std::string::npos) return {scripted_config(spec), scripted_config(spec)};
    return {scripted_config(spec.substr(0, comma)), scripted_config(spec.substr(comma + 1))};
  } catch (const InvalidInput& e) {
    throw UsageError(std::string(e.what()) + " (known: " + [] {
      std::string s;
      for (const auto& id : script_ids()) s += (s.empty() ? "" : ", ") + id;
      return s;
    }() + ")");
  }
}

// Files given directly plus every *.jsonl below given directories.
std::vector<EpisodeRecord> load_records(const std::vector<std::string>& paths) {
  std::vector<EpisodeRecord> out;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      auto loaded = report::load_transcript_dir(p);
      for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << '\n';
      out.insert(out.end(), loaded.records.begin(), loaded.records.end());
    } else {
      auto recs = read_transcripts(p);
      out.insert(out.end(), recs.begin(), recs.end());
    }
  }
  if (out.empty()) throw InvalidInput("no transcripts found");
  return out;
}

json score_json(const std::vector<EpisodeRecord>& records) {
  std::map<Game, std::vector<EpisodeRecord>> by_game;
  for (const auto& r : records) by_game[r.game].push_back(r);
  json j = json::object();
  for (const auto& [g, group] : by_game) j[to_string(g)] = to_json_value(aggregate(group));
  return j;
}

// An output directory belongs to one run_id.
void claim_dir(const std::string& dir, const RunManifest& m) {
  fs::create_directories(dir);
  const auto marker = dir + "/run.json";
  if (fs::exists(marker)) {
    const auto prev = json::parse(report::read_text(marker)).value("run_id", "");
    if (prev != m.run_id) throw UsageError(dir + " already holds run '" + prev + "'");
  }
  report::write_text(marker, json(m).dump(2) + "\n");
}

int run_manifest(const RunManifest& m, bool timestamps) {
  Templates templates;
  if (!m.templates.empty()) templates.load_overrides(m.templates);
  const auto suite = manifest_suite(m);
  if (!m.reports.empty()) claim_dir(m.reports, m);
  if (const auto parent = fs::path(m.transcripts).parent_path(); !parent.empty()) fs::create_directories(parent);

  RunOptions opt;
  opt.templates = &templates;
  opt.episode.timestamps = timestamps;
  const auto records = run_suite(suite, m.agents[0], m.agents[1], m.workers, opt);
  write_transcripts(m.transcripts, records);

  const auto score = to_json_value(aggregate(records));
  if (!m.reports.empty()) {
    report::write_text(m.reports + "/score.json", score.dump(2) + "\n");
    report::write_reports(m.reports, report::build_reports(records));
  }
  std::cout << m.run_id << ": " << records.size() << " episodes, clemscore " << score.at("clemscore").get<double>()
            << ", played " << score.at("percent_played").get<double>() << "%\n";

  std::int64_t transport = 0;
  for (const auto& r : records) transport += r.abort_reason && *r.abort_reason == "transport_failure";
  if (transport) {
    std::cerr << "error: " << transport << " episode(s) aborted on transport failure\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"negotiation dialogue-game benchmark"};
  app.require_subcommand(1);

  std::string game = "dond", locale = "en", out, agents, manifest_path, instances;
  std::uint64_t seed = 0;
  int workers = 1;
  bool timestamps = false;
  std::vector<std::string> experiments, inputs;

  auto* gen = app.add_subcommand("generate", "write a default instance suite as JSONL");
  gen->add_option("--game", game)->check(CLI::IsMember({"dond", "cleanup", "balloon"}))->required();
  gen->add_option("--seed", seed);
  gen->add_option("--locale", locale)->check(CLI::IsMember({"en", "de", "it"}));
  gen->add_option("--experiments", experiments, "keep only these experiments");
  gen->add_option("--out", out, "suite file")->required();

  auto* run = app.add_subcommand("run", "play a suite and write transcripts plus score");
  run->add_option("--manifest", manifest_path)->check(CLI::ExistingFile);
  run->add_option("--game", game)->check(CLI::IsMember({"dond", "cleanup", "balloon"}));
  run->add_option("--seed", seed);
  run->add_option("--locale", locale)->check(CLI::IsMember({"en", "de", "it"}));
  run->add_option("--agents", agents, "script ids 'a,b', one id for both seats, or an agent JSON file");
  run->add_option("--instances", instances, "suite file instead of generating from the seed")->check(CLI::ExistingFile);
  run->add_option("--experiments", experiments);
  run->add_option("--workers", workers)->check(CLI::PositiveNumber);
  run->add_option("--out", out, "output directory");
  run->add_flag("--timestamps", timestamps, "record wall-clock times (breaks byte-identical reruns)");

  auto* score = app.add_subcommand("score", "clemscore, %played and quality per game");
  score->add_option("transcripts", inputs, "transcript files or directories")->required();
  score->add_option("--out", out, "write the score JSON here");

  auto* analyze = app.add_subcommand("analyze", "per-episode metrics as CSV");
  analyze->add_option("transcripts", inputs)->required();
  analyze->add_option("--out", out, "directory for <game>_episodes.csv; stdout when absent");

  auto* rep = app.add_subcommand("report", "per-experiment tables (CSV + markdown)");
  rep->add_option("transcripts", inputs, "transcript directory")->required()->expected(1);
  rep->add_option("--out", out, "report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gen) {
      auto suite = generate_suite(kGames.at(game), seed, kLocales.at(locale));
      if (!experiments.empty())
        std::erase_if(suite, [&](const SuiteEntry& e) {
          return std::find(experiments.begin(), experiments.end(), e.experiment) == experiments.end();
        });
      if (suite.empty()) throw UsageError("experiment filter selects no instances");
      if (const auto parent = fs::path(out).parent_path(); !parent.empty()) fs::create_directories(parent);
      write_suite(out, suite);
      std::cout << suite.size() << " " << game << " instances -> " << out << '\n';
      return 0;
    }

    if (*run) {
      RunManifest m;
      if (!manifest_path.empty()) {
        try {
          m = read_manifest(manifest_path);
        } catch (const InvalidInput& e) {
          throw UsageError(e.what());
        }
        if (run->count("--workers")) m.workers = workers;
        if (!out.empty()) {
          m.transcripts = out + "/transcripts.jsonl";
          m.reports = out;
        }
      } else {
        if (agents.empty() || out.empty()) throw UsageError("run needs --manifest, or --agents and --out");
        m.run_id = game + "-" + std::to_string(seed);
        m.game = kGames.at(game);
        m.seed = seed;
        m.locale = kLocales.at(locale);
        m.agents = parse_agents(agents);
        m.instances = instances;
        m.experiments = experiments;
        m.workers = workers;
        m.transcripts = out + "/transcripts.jsonl";
        m.reports = out;
        m.validate();
      }
      return run_manifest(m, timestamps);
    }

    const auto records = load_records(inputs);
    if (*score) {
      const auto j = score_json(records);
      if (!out.empty()) report::write_text(out, j.dump(2) + "\n");
      std::cout << j.dump(2) << '\n';
      return 0;
    }
    if (*analyze) {
      for (const auto& r : report::build_reports(records)) {
        if (out.empty()) {
          std::cout << report::to_csv(r.episodes);
        } else {
          fs::create_directories(out);
          report::write_text(out + "/" + to_string(r.game) + "_episodes.csv", report::to_csv(r.episodes));
        }
      }
      return 0;
    }
    if (*rep) {
      const auto reports = report::build_reports(records);
      for (const auto& f : report::write_reports(out, reports)) std::cerr << "wrote " << f << '\n';
      for (const auto& r : reports) std::cout << "## " << to_string(r.game) << "\n\n" << report::to_markdown(r.summary) << '\n';
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
