#pragma once

// Suites, agent configuration, run manifests and the episode driver that
// ties an instance, two agents and a seed to one EpisodeRecord.

#include <algorithm>
#include <atomic>
#include <fstream>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "negobench/agents.hpp"
#include "negobench/balloon.hpp"
#include "negobench/cleanup.hpp"
#include "negobench/dond.hpp"
#include "negobench/record.hpp"
#include "negobench/remote_agent.hpp"
#include "negobench/rng.hpp"
#include "negobench/templates.hpp"

namespace negobench {

// --- suites -----------------------------------------------------------------

struct SuiteEntry {
  std::string instance_id;
  std::string experiment;
  std::uint64_t seed = 0;
  AnyInstance instance;
};

inline void to_json(json& j, const SuiteEntry& e) {
  j = {{"instance_id", e.instance_id}, {"experiment", e.experiment}, {"seed", e.seed}, {"game", game_of(e.instance)}};
  std::visit([&](const auto& inst) { j["instance"] = inst; }, e.instance);
}

inline void from_json(const json& j, SuiteEntry& e) {
  j.at("instance_id").get_to(e.instance_id);
  j.at("experiment").get_to(e.experiment);
  j.at("seed").get_to(e.seed);
  switch (parse_enum<Game>(j.at("game").get<std::string>(), "game")) {
    case Game::dond: e.instance = j.at("instance").get<dond::Instance>(); break;
    case Game::cleanup: e.instance = j.at("instance").get<cleanup::Instance>(); break;
    case Game::balloon: e.instance = j.at("instance").get<balloon::Instance>(); break;
  }
}

inline Locale locale_of(const AnyInstance& inst) {
  return std::visit([](const auto& i) { return i.locale; }, inst);
}

inline std::string padded(std::size_t i) {
  std::string s = std::to_string(i);
  return std::string(s.size() < 2 ? 2 - s.size() : 0, '0') + s;
}

// The default suites: DoND 2 modes x 20, Clean Up 3 levels x 3 backgrounds
// x {3,5,7} objects, Balloon 6 experiments x 6. Every instance draws from
// its own derived seed.
inline std::vector<SuiteEntry> generate_suite(Game game, std::uint64_t seed, Locale locale = Locale::en) {
  std::vector<SuiteEntry> out;
  switch (game) {
    case Game::dond:
      for (auto mode : {dond::Mode::cooperative, dond::Mode::semi_competitive}) {
        const std::string exp = json(mode).get<std::string>();
        for (std::size_t i = 0; i < 20; ++i) {
          const auto s = derive_seed(seed, "dond/" + exp, i);
          Rng rng(s);
          out.push_back({"dond-" + exp + "-" + padded(i), exp, s,
                         dond::generate_instance(rng, mode, dond::default_lexicon(), {}, locale)});
        }
      }
      break;
    case Game::cleanup:
      for (auto level : {cleanup::Level::easy, cleanup::Level::medium, cleanup::Level::hard}) {
        const std::string exp = json(level).get<std::string>();
        for (std::size_t g = 0; g < 3; ++g) {
          const auto s = derive_seed(seed, "cleanup/" + exp, g);
          Rng rng(s);
          const auto background = cleanup::generate_background(rng, level);
          for (int n : {3, 5, 7}) {
            auto inst = cleanup::instance_from_background(rng, background, level, n);
            inst.locale = locale;
            out.push_back({"cleanup-" + exp + "-g" + std::to_string(g) + "-n" + std::to_string(n), exp, s, inst});
          }
        }
      }
      break;
    case Game::balloon:
      for (const auto& e : balloon::default_experiments()) {
        for (std::size_t i = 0; i < 6; ++i) {
          const auto s = derive_seed(seed, "balloon/" + e.name, i);
          Rng rng(s);
          out.push_back({"balloon-" + e.name + "-" + padded(i), e.name, s,
                         balloon::generate_instance(rng, e.n_items, e.mode, e.flags, {}, locale)});
        }
      }
      break;
  }
  const std::size_t expected = game == Game::dond ? 40 : game == Game::cleanup ? 27 : 36;
  if (out.size() != expected) throw Error("suite size mismatch for " + to_string(game));
  return out;
}

inline void write_suite(const std::string& path, const std::vector<SuiteEntry>& suite) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path);
  for (const auto& e : suite) out << json(e).dump() << '\n';
}

inline std::vector<SuiteEntry> read_suite(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read " + path);
  std::vector<SuiteEntry> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(json::parse(line).get<SuiteEntry>());
    } catch (const json::exception& e) {
      throw InvalidInput(path + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

// --- agents -----------------------------------------------------------------

enum class AgentKind { scripted, remote };
NLOHMANN_JSON_SERIALIZE_ENUM(AgentKind, {{AgentKind::scripted, "scripted"}, {AgentKind::remote, "remote"}})

struct AgentConfig {
  AgentKind kind = AgentKind::scripted;
  std::string script_id;
  std::string endpoint;
  std::string model_id;
  std::string api_key_env;
  bool reasoning_enabled = false;
  json sampling = json::object();
  Prices prices;
  double timeout_s = 120;

  void validate() const {
    if (kind == AgentKind::scripted &&
        std::find(script_ids().begin(), script_ids().end(), script_id) == script_ids().end())
      throw InvalidInput("unknown script id '" + script_id + "'");
    if (kind == AgentKind::remote && (endpoint.empty() || model_id.empty()))
      throw InvalidInput("remote agents need endpoint and model_id");
  }
};

inline void to_json(json& j, const AgentConfig& c) {
  j = {{"kind", c.kind}};
  if (c.kind == AgentKind::scripted) {
    j["script_id"] = c.script_id;
    return;
  }
  j.update({{"endpoint", c.endpoint}, {"model_id", c.model_id}, {"api_key_env", c.api_key_env},
            {"reasoning_enabled", c.reasoning_enabled}, {"sampling", c.sampling}, {"prices", c.prices},
            {"timeout_s", c.timeout_s}});
}

inline void from_json(const json& j, AgentConfig& c) {
  c = AgentConfig{};
  c.kind = parse_enum<AgentKind>(j.at("kind").get<std::string>(), "agent kind");
  c.script_id = j.value("script_id", "");
  c.endpoint = j.value("endpoint", "");
  c.model_id = j.value("model_id", "");
  c.api_key_env = j.value("api_key_env", "");
  c.reasoning_enabled = j.value("reasoning_enabled", false);
  c.sampling = j.value("sampling", json::object());
  if (j.contains("prices")) j.at("prices").get_to(c.prices);
  c.timeout_s = j.value("timeout_s", 120.0);
}

// "script:balloon_greedy" or just "balloon_greedy".
inline AgentConfig scripted_config(const std::string& spec) {
  AgentConfig c;
  c.script_id = spec.rfind("script:", 0) == 0 ? spec.substr(7) : spec;
  c.validate();
  return c;
}

inline std::unique_ptr<Agent> make_agent(const AgentConfig& cfg, const AnyInstance& inst, Seat seat) {
  cfg.validate();
  if (cfg.kind == AgentKind::scripted) return make_scripted(cfg.script_id, inst, seat);
  RemoteConfig r;
  r.endpoint = cfg.endpoint;
  r.model_id = cfg.model_id;
  r.api_key_env = cfg.api_key_env;
  r.reasoning_enabled = cfg.reasoning_enabled;
  r.sampling = cfg.sampling;
  r.prices = cfg.prices;
  r.timeout_s = cfg.timeout_s;
  return std::make_unique<RemoteAgent>(r);
}

// --- episodes ---------------------------------------------------------------

struct RunOptions {
  EpisodeOptions episode;
  const Templates* templates = nullptr;  // builtin when null
};

inline EpisodeRecord run_episode(const SuiteEntry& entry, Agent& a, Agent& b, const RunOptions& opt = {}) {
  const Templates& t = opt.templates ? *opt.templates : Templates::builtin();
  EpisodeRecord rec;
  rec.game = game_of(entry.instance);
  rec.episode_id = entry.instance_id;
  rec.instance_ref = entry.instance_id;
  rec.experiment = entry.experiment;
  rec.locale = locale_of(entry.instance);
  rec.seed = entry.seed;
  std::visit([&](const auto& inst) { rec.instance = inst; }, entry.instance);
  Episode ep(rec, a, b, opt.episode);
  std::visit(
      [&](const auto& inst) {
        using T = std::decay_t<decltype(inst)>;
        if constexpr (std::is_same_v<T, dond::Instance>) dond::play(ep, inst, t);
        else if constexpr (std::is_same_v<T, cleanup::Instance>) cleanup::play(ep, inst, t);
        else balloon::play(ep, inst, t);
      },
      entry.instance);
  rec.validate();
  return rec;
}

inline EpisodeRecord run_episode(const SuiteEntry& entry, const AgentConfig& a, const AgentConfig& b,
                                 const RunOptions& opt = {}) {
  auto agent_a = make_agent(a, entry.instance, Seat::A);
  auto agent_b = make_agent(b, entry.instance, Seat::B);
  return run_episode(entry, *agent_a, *agent_b, opt);
}

// Runs a suite with up to `workers` episodes in flight. Output order is the
// suite order regardless of scheduling.
inline std::vector<EpisodeRecord> run_suite(const std::vector<SuiteEntry>& suite, const AgentConfig& a,
                                            const AgentConfig& b, int workers = 1, const RunOptions& opt = {}) {
  a.validate();
  b.validate();
  std::vector<EpisodeRecord> out(suite.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    for (std::size_t i; (i = next++) < suite.size();) {
      try {
        out[i] = run_episode(suite[i], a, b, opt);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const auto n = static_cast<std::size_t>(std::max(1, workers));
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < std::min(n, suite.size()); ++k) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

// --- manifest ---------------------------------------------------------------

struct RunManifest {
  std::string run_id;
  Game game = Game::dond;
  std::vector<std::string> experiments;  // empty = all experiments of the suite
  std::array<AgentConfig, 2> agents;
  Locale locale = Locale::en;
  std::uint64_t seed = 0;
  std::string instances;    // suite file; generated from the seed when empty
  std::string transcripts;  // output JSONL
  std::string reports;      // output directory for score/report files
  int workers = 1;
  std::string templates;    // optional template override pack

  void validate() const {
    if (run_id.empty()) throw InvalidInput("manifest: run_id is required");
    if (transcripts.empty()) throw InvalidInput("manifest: transcripts path is required");
    if (workers < 1) throw InvalidInput("manifest: workers must be >= 1");
    for (const auto& a : agents) a.validate();
  }
};

inline void to_json(json& j, const RunManifest& m) {
  j = {{"run_id", m.run_id},         {"game", m.game},           {"experiments", m.experiments},
       {"agents", m.agents},         {"locale", m.locale},       {"seed", m.seed},
       {"instances", m.instances},   {"transcripts", m.transcripts}, {"reports", m.reports},
       {"workers", m.workers},       {"templates", m.templates}};
}

inline void from_json(const json& j, RunManifest& m) {
  m.run_id = j.at("run_id").get<std::string>();
  m.game = parse_enum<Game>(j.at("game").get<std::string>(), "game");
  m.experiments = j.value("experiments", std::vector<std::string>{});
  const auto& agents = j.at("agents");
  if (!agents.is_array() || agents.size() != 2) throw InvalidInput("manifest: agents must list exactly two seats");
  m.agents = {agents[0].get<AgentConfig>(), agents[1].get<AgentConfig>()};
  m.locale = j.contains("locale") ? parse_enum<Locale>(j.at("locale").get<std::string>(), "locale") : Locale::en;
  m.seed = j.value("seed", std::uint64_t{0});
  m.instances = j.value("instances", "");
  m.transcripts = j.value("transcripts", "");
  m.reports = j.value("reports", "");
  m.workers = j.value("workers", 1);
  m.templates = j.value("templates", "");
}

inline RunManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read manifest " + path);
  RunManifest m;
  try {
    m = json::parse(in).get<RunManifest>();
  } catch (const json::exception& e) {
    throw InvalidInput("malformed manifest " + path + ": " + e.what());
  }
  m.validate();
  return m;
}

inline std::vector<SuiteEntry> manifest_suite(const RunManifest& m) {
  auto suite = m.instances.empty() ? generate_suite(m.game, m.seed, m.locale) : read_suite(m.instances);
  for (const auto& e : suite)
    if (game_of(e.instance) != m.game) throw InvalidInput("instance " + e.instance_id + " is not a " + to_string(m.game) + " instance");
  if (!m.experiments.empty()) {
    std::erase_if(suite, [&](const SuiteEntry& e) {
      return std::find(m.experiments.begin(), m.experiments.end(), e.experiment) == m.experiments.end();
    });
    if (suite.empty()) throw InvalidInput("manifest: experiment filter selects no instances");
  }
  return suite;
}

}  // namespace negobench
