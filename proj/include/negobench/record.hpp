#pragma once

// Episode transcripts and benchmark aggregation.
//
// A transcript file holds one EpisodeRecord per line (JSONL). Every record
// carries `schema_version`; readers reject records without it.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "negobench/error.hpp"

namespace negobench {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

enum class Game { dond, cleanup, balloon };
enum class Locale { en, de, it };
enum class Actor { game_master, player_a, player_b };
enum class Channel { gm_to_a, gm_to_b, a_to_gm, b_to_gm, a_to_b, b_to_a };
enum class EventKind { prompt, message, command, violation, state_change, score };
enum class Status { played, aborted };
enum class EndState { goal, limit, abort };

NLOHMANN_JSON_SERIALIZE_ENUM(Game, {{Game::dond, "dond"}, {Game::cleanup, "cleanup"}, {Game::balloon, "balloon"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Locale, {{Locale::en, "en"}, {Locale::de, "de"}, {Locale::it, "it"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Actor, {{Actor::game_master, "game_master"},
                                     {Actor::player_a, "player_a"},
                                     {Actor::player_b, "player_b"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Channel, {{Channel::gm_to_a, "gm_to_a"},
                                       {Channel::gm_to_b, "gm_to_b"},
                                       {Channel::a_to_gm, "a_to_gm"},
                                       {Channel::b_to_gm, "b_to_gm"},
                                       {Channel::a_to_b, "a_to_b"},
                                       {Channel::b_to_a, "b_to_a"}})
NLOHMANN_JSON_SERIALIZE_ENUM(EventKind, {{EventKind::prompt, "prompt"},
                                         {EventKind::message, "message"},
                                         {EventKind::command, "command"},
                                         {EventKind::violation, "violation"},
                                         {EventKind::state_change, "state_change"},
                                         {EventKind::score, "score"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Status, {{Status::played, "played"}, {Status::aborted, "aborted"}})
NLOHMANN_JSON_SERIALIZE_ENUM(EndState, {{EndState::goal, "goal"}, {EndState::limit, "limit"}, {EndState::abort, "abort"}})

inline std::string to_string(Game g) { return json(g).get<std::string>(); }
inline std::string to_string(Locale l) { return json(l).get<std::string>(); }

template <class Enum>
Enum parse_enum(const std::string& text, const char* what) {
  const Enum value = json(text).get<Enum>();
  // nlohmann maps unknown strings to the first enumerator; round-trip to detect that.
  if (json(value).get<std::string>() != text) throw InvalidInput(std::string("unknown ") + what + " '" + text + "'");
  return value;
}

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::int64_t reasoning_tokens = 0;
  double cost_estimate = 0.0;

  TokenUsage& operator+=(const TokenUsage& o) {
    prompt_tokens += o.prompt_tokens;
    completion_tokens += o.completion_tokens;
    reasoning_tokens += o.reasoning_tokens;
    cost_estimate += o.cost_estimate;
    return *this;
  }
  friend bool operator==(const TokenUsage&, const TokenUsage&) = default;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TokenUsage, prompt_tokens, completion_tokens, reasoning_tokens, cost_estimate)

struct PlayerMeta {
  TokenUsage usage;
  std::int64_t calls = 0;
  std::int64_t reasoning_chars = 0;
  std::int64_t reasoning_turns = 0;  // calls that returned non-empty reasoning text
  friend bool operator==(const PlayerMeta&, const PlayerMeta&) = default;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PlayerMeta, usage, calls, reasoning_chars, reasoning_turns)

struct Event {
  std::int64_t seq = 0;
  Actor actor = Actor::game_master;
  Channel channel = Channel::gm_to_a;
  EventKind kind = EventKind::prompt;
  std::string content;
  std::map<std::string, std::string> meta;
  friend bool operator==(const Event&, const Event&) = default;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Event, seq, actor, channel, kind, content, meta)

struct EpisodeRecord {
  int schema_version = kSchemaVersion;
  std::string episode_id;
  Game game = Game::dond;
  std::string experiment;
  std::string instance_ref;
  Locale locale = Locale::en;
  std::uint64_t seed = 0;
  json instance;  // the full instance, so the record is self-describing
  std::vector<Event> events;
  Status status = Status::aborted;
  EndState end_state = EndState::abort;
  std::optional<std::string> abort_reason;
  std::optional<double> quality;
  json details = json::object();  // game-specific outcome fields
  std::array<PlayerMeta, 2> players{};

  void validate() const {
    if (schema_version != kSchemaVersion)
      throw InvalidInput("unsupported transcript schema_version " + std::to_string(schema_version));
    if ((status == Status::played) != quality.has_value())
      throw InvalidInput("record " + episode_id + ": played status and quality presence disagree");
    if (status == Status::aborted && !abort_reason)
      throw InvalidInput("record " + episode_id + ": aborted without abort_reason");
    if (quality && (*quality < 0.0 || *quality > 100.0 || std::isnan(*quality)))
      throw InvalidInput("record " + episode_id + ": quality outside [0,100]");
    for (std::size_t i = 1; i < events.size(); ++i) {
      if (events[i].seq <= events[i - 1].seq)
        throw InvalidInput("record " + episode_id + ": event sequence is not strictly increasing");
    }
  }

  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

inline void to_json(json& j, const EpisodeRecord& r) {
  j = json{{"schema_version", r.schema_version},
           {"episode_id", r.episode_id},
           {"game", r.game},
           {"experiment", r.experiment},
           {"instance_ref", r.instance_ref},
           {"locale", r.locale},
           {"seed", r.seed},
           {"instance", r.instance},
           {"events", r.events},
           {"status", r.status},
           {"end_state", r.end_state},
           {"abort_reason", r.abort_reason ? json(*r.abort_reason) : json(nullptr)},
           {"quality", r.quality ? json(*r.quality) : json(nullptr)},
           {"details", r.details},
           {"players", r.players}};
}

inline void from_json(const json& j, EpisodeRecord& r) {
  if (!j.contains("schema_version")) throw InvalidInput("transcript record lacks schema_version");
  j.at("schema_version").get_to(r.schema_version);
  j.at("episode_id").get_to(r.episode_id);
  r.game = parse_enum<Game>(j.at("game").get<std::string>(), "game");
  j.at("experiment").get_to(r.experiment);
  j.at("instance_ref").get_to(r.instance_ref);
  r.locale = parse_enum<Locale>(j.at("locale").get<std::string>(), "locale");
  j.at("seed").get_to(r.seed);
  r.instance = j.at("instance");
  j.at("events").get_to(r.events);
  r.status = parse_enum<Status>(j.at("status").get<std::string>(), "status");
  r.end_state = parse_enum<EndState>(j.at("end_state").get<std::string>(), "end_state");
  const auto& reason = j.at("abort_reason");
  r.abort_reason = reason.is_null() ? std::nullopt : std::optional<std::string>(reason.get<std::string>());
  const auto& q = j.at("quality");
  r.quality = q.is_null() ? std::nullopt : std::optional<double>(q.get<double>());
  r.details = j.at("details");
  j.at("players").get_to(r.players);
  r.validate();
}

inline std::string serialize(const EpisodeRecord& r) { return json(r).dump(); }

inline EpisodeRecord parse_record(const std::string& line) {
  try {
    return json::parse(line).get<EpisodeRecord>();
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed transcript record: ") + e.what());
  }
}

inline void write_transcripts(const std::string& path, const std::vector<EpisodeRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot write transcript file " + path);
  for (const auto& r : records) out << serialize(r) << '\n';
}

inline std::vector<EpisodeRecord> read_transcripts(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read transcript file " + path);
  std::vector<EpisodeRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(parse_record(line));
  }
  return out;
}

// --- Aggregation -------------------------------------------------------------

struct ScoreSummary {
  std::int64_t episodes = 0;
  std::int64_t played = 0;
  double percent_played = 0.0;
  std::optional<double> mean_quality;  // absent when nothing was played
  double clemscore = 0.0;
};

struct BenchmarkScore {
  double percent_played = 0.0;
  std::optional<double> mean_quality;
  double clemscore = 0.0;
  std::int64_t episodes = 0;
  std::int64_t played = 0;
  std::map<std::string, ScoreSummary> breakdown;  // by experiment
};

inline json to_json_value(const ScoreSummary& s) {
  return json{{"episodes", s.episodes},
              {"played", s.played},
              {"percent_played", s.percent_played},
              {"mean_quality", s.mean_quality ? json(*s.mean_quality) : json(nullptr)},
              {"clemscore", s.clemscore}};
}

inline json to_json_value(const BenchmarkScore& b) {
  json j{{"episodes", b.episodes},
         {"played", b.played},
         {"percent_played", b.percent_played},
         {"mean_quality", b.mean_quality ? json(*b.mean_quality) : json(nullptr)},
         {"clemscore", b.clemscore},
         {"breakdown", json::object()}};
  for (const auto& [name, s] : b.breakdown) j["breakdown"][name] = to_json_value(s);
  return j;
}

namespace detail {

// Order-independent mean: qualities are summed in sorted order so that the
// result does not depend on the input permutation.
inline ScoreSummary summarize(std::vector<double> qualities, std::int64_t episodes) {
  ScoreSummary s;
  s.episodes = episodes;
  s.played = static_cast<std::int64_t>(qualities.size());
  s.percent_played = episodes == 0 ? 0.0 : 100.0 * static_cast<double>(s.played) / static_cast<double>(episodes);
  if (!qualities.empty()) {
    std::sort(qualities.begin(), qualities.end());
    double sum = 0.0;
    for (double q : qualities) sum += q;
    s.mean_quality = sum / static_cast<double>(qualities.size());
    s.clemscore = s.percent_played / 100.0 * *s.mean_quality;
  }
  return s;
}

}  // namespace detail

// clemscore = %played / 100 * mean quality over played episodes.
inline BenchmarkScore aggregate(const std::vector<EpisodeRecord>& records) {
  if (records.empty()) throw InvalidInput("aggregate: no records");
  const Game game = records.front().game;
  std::vector<double> all;
  std::map<std::string, std::pair<std::vector<double>, std::int64_t>> per_exp;
  for (const auto& r : records) {
    if (r.game != game) throw InvalidInput("aggregate: records mix games");
    auto& slot = per_exp[r.experiment];
    ++slot.second;
    if (r.status == Status::played) {
      all.push_back(*r.quality);
      slot.first.push_back(*r.quality);
    }
  }
  const auto total = detail::summarize(all, static_cast<std::int64_t>(records.size()));
  BenchmarkScore b;
  b.episodes = total.episodes;
  b.played = total.played;
  b.percent_played = total.percent_played;
  b.mean_quality = total.mean_quality;
  b.clemscore = total.clemscore;
  for (auto& [name, slot] : per_exp) b.breakdown[name] = detail::summarize(slot.first, slot.second);
  return b;
}

}  // namespace negobench
