#pragma once

// Deal or No Deal: free messages, then one secret proposal per player. The
// Game Master never re-prompts; any rule violation aborts the episode.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "negobench/engine.hpp"
#include "negobench/error.hpp"
#include "negobench/optimize.hpp"
#include "negobench/record.hpp"
#include "negobench/rng.hpp"
#include "negobench/templates.hpp"

namespace negobench::dond {

using optimize::ItemCounts;
using optimize::Payoffs;
using optimize::ValueMap;

struct Noun {
  std::string singular;
  std::string plural;
};

inline const std::vector<Noun>& default_lexicon() {
  static const std::vector<Noun> nouns = [] {
    const char* regular[] = {
        "book",    "hat",      "ball",    "apple",   "bottle",  "candle",   "chair",  "clock",    "coin",
        "cup",     "desk",     "drum",    "egg",     "flower",  "fork",     "glove",  "guitar",   "hammer",
        "helmet",  "jacket",   "kettle",  "key",     "kite",    "lamp",    "magnet",  "map",      "mirror",
        "mug",     "necklace", "notebook", "orange", "pan",     "pen",     "pencil",  "pillow",   "plate",
        "radio",   "ring",     "rope",    "ruler",   "saw",     "scarf",   "shoe",    "shovel",   "sock",
        "spoon",   "stamp",    "stone",   "table",   "ticket",  "towel",   "toy",     "tray",     "trumpet",
        "umbrella", "vase",    "violin",  "wallet",  "whistle", "basket",  "blanket", "bucket",   "button",
        "camera",  "card",     "carpet",  "coat",    "comb",    "cookie",  "crayon",  "diamond",  "doll",
        "feather", "flag",     "hook",    "jar",     "ladder",  "lock",    "marble",  "medal",    "needle",
        "oar",     "paddle",   "puzzle",  "ribbon",  "rocket",  "sandal",  "shell",   "spade",    "sticker",
        "tent",    "thermos",  "tulip",   "wheel",
    };
    const std::pair<const char*, const char*> irregular[] = {
        {"box", "boxes"}, {"brush", "brushes"}, {"glass", "glasses"}, {"knife", "knives"},
        {"leaf", "leaves"}, {"battery", "batteries"},
    };
    std::vector<Noun> out;
    for (const char* n : regular) out.push_back({n, std::string(n) + "s"});
    for (const auto& [s, p] : irregular) out.push_back({s, p});
    return out;
  }();
  return nouns;
}

enum class Mode { cooperative, semi_competitive };
NLOHMANN_JSON_SERIALIZE_ENUM(Mode, {{Mode::cooperative, "cooperative"}, {Mode::semi_competitive, "semi_competitive"}})

struct Instance {
  std::vector<std::string> items;  // display order, singular names
  std::map<std::string, std::string> plurals;
  ItemCounts pool;
  ValueMap values_a, values_b;
  Mode mode = Mode::cooperative;
  int max_messages_each = 5;
  Locale locale = Locale::en;

  const ValueMap& values(Seat s) const { return s == Seat::A ? values_a : values_b; }

  void validate() const {
    if (items.size() < 3 || items.size() > 5) throw InvalidInput("dond: instance needs 3-5 item types");
    if (pool.size() != items.size() || values_a.size() != items.size() || values_b.size() != items.size())
      throw InvalidInput("dond: pool and value maps must cover exactly the item types");
    for (const auto& item : items) {
      if (!pool.count(item) || !values_a.count(item) || !values_b.count(item) || !plurals.count(item))
        throw InvalidInput("dond: item '" + item + "' missing from pool, values or plurals");
      if (pool.at(item) < 1) throw InvalidInput("dond: item counts must be >= 1");
      if (values_a.at(item) < 0 || values_b.at(item) < 0) throw InvalidInput("dond: values must be >= 0");
    }
    if (max_messages_each < 1) throw InvalidInput("dond: max_messages_each must be >= 1");
  }

  friend bool operator==(const Instance&, const Instance&) = default;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Instance, items, plurals, pool, values_a, values_b, mode, max_messages_each, locale)

struct GeneratorConfig {
  int min_types = 3, max_types = 5;
  int max_count = 3;
  int max_value = 10;
  std::optional<std::int64_t> value_total;  // when set, each player's pool value equals it exactly
  int max_messages_each = 5;
};

inline std::int64_t pool_value(const ItemCounts& pool, const ValueMap& values) {
  std::int64_t total = 0;
  for (const auto& [item, count] : pool) total += count * values.at(item);
  return total;
}

inline Instance generate_instance(Rng& rng, Mode mode, const std::vector<Noun>& lexicon = default_lexicon(),
                                  const GeneratorConfig& cfg = {}, Locale locale = Locale::en) {
  if (lexicon.size() < 5) throw InvalidInput("dond: lexicon needs at least 5 nouns");
  Instance inst;
  inst.mode = mode;
  inst.locale = locale;
  inst.max_messages_each = cfg.max_messages_each;
  const auto n_types = static_cast<std::size_t>(rng.uniform(cfg.min_types, cfg.max_types));
  for (const auto& noun : rng.sample(lexicon, n_types)) {
    inst.items.push_back(noun.singular);
    inst.plurals[noun.singular] = noun.plural;
    inst.pool[noun.singular] = rng.uniform(1, cfg.max_count);
  }
  auto draw = [&](ValueMap& values) {
    for (int attempt = 0; attempt < 100000; ++attempt) {
      values.clear();
      for (const auto& item : inst.items) values[item] = rng.uniform(0, cfg.max_value);
      const auto total = pool_value(inst.pool, values);
      if (total > 0 && (!cfg.value_total || total == *cfg.value_total)) return;
    }
    throw DegenerateInstance("dond: could not draw values matching value_total");
  };
  draw(inst.values_a);
  draw(inst.values_b);
  return inst;
}

// "1 book, 2 hats, 2 balls."
inline std::string items_text(const Instance& inst) {
  std::string out;
  for (const auto& item : inst.items) {
    if (!out.empty()) out += ", ";
    const auto n = inst.pool.at(item);
    out += std::to_string(n) + " " + (n == 1 ? item : inst.plurals.at(item));
  }
  return out + ".";
}

// "book: 0, hat: 1, ball: 4."
inline std::string value_function_text(const Instance& inst, Seat s) {
  std::string out;
  for (const auto& item : inst.items) {
    if (!out.empty()) out += ", ";
    out += item + ": " + std::to_string(inst.values(s).at(item));
  }
  return out + ".";
}

inline std::string initial_prompt(const Instance& inst, Seat s, const Templates& t = Templates::builtin()) {
  const std::string goal =
      t.get(inst.locale, inst.mode == Mode::cooperative ? "dond.goal.cooperative" : "dond.goal.semi_competitive");
  return render(t.get(inst.locale, "dond.initial"), {{"$N$", std::to_string(inst.max_messages_each)},
                                                     {"$GOAL$", goal},
                                                     {"$ITEMS$", items_text(inst)},
                                                     {"$VALUE_FUNCTION$", value_function_text(inst, s)}});
}

// --- Parsing -----------------------------------------------------------------

struct Utterance {
  enum class Kind { free_message, proposal } kind = Kind::free_message;
  std::optional<ItemCounts> proposal;
  std::string text;
  friend bool operator==(const Utterance&, const Utterance&) = default;
};

inline Violation wrong_syntax(const std::string& why) {
  return {"wrong_syntax", "Your proposal is not in the expected format: " + why, "format"};
}

inline Violation nonexistent_items(const std::string& why) {
  return {"nonexistent_items", "Your proposal names items that are not available: " + why, "game"};
}

inline std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Any '[' marks the reply as a proposal attempt, so it is never relayed.
inline Validated<Utterance> parse_reply(const std::string& text, const Instance& inst,
                                        const Templates& t = Templates::builtin()) {
  Utterance u;
  u.text = text;
  const auto open = text.find('[');
  if (open == std::string::npos) return u;
  u.kind = Utterance::Kind::proposal;
  const auto close = text.find(']', open);
  if (close == std::string::npos) return wrong_syntax("missing ']'");
  if (text.find('[', open + 1) != std::string::npos || text.find(']', close + 1) != std::string::npos ||
      text.find(']') < open)
    return wrong_syntax("more than one bracketed segment");
  const std::string segment = text.substr(open + 1, close - open - 1);

  const std::string keyword = lowercase(t.get(inst.locale, "dond.keyword"));
  const std::string lowered = lowercase(segment);
  std::size_t pos = lowered.find_first_not_of(" \t\n");
  if (pos == std::string::npos || lowered.compare(pos, keyword.size(), keyword) != 0)
    return wrong_syntax("expected '" + t.get(inst.locale, "dond.keyword") + ":'");
  pos = lowered.find_first_not_of(" \t", pos + keyword.size());
  if (pos == std::string::npos || lowered[pos] != ':')
    return wrong_syntax("expected ':' after the keyword");
  std::string body = segment.substr(pos + 1);

  ItemCounts counts;
  static const std::regex entry_re(R"(^\s*(\d+)\s+([^\d,][^,]*?)\s*$)");
  static const std::regex blank_re(R"(^\s*$)");
  if (!std::regex_match(body, blank_re)) {
    std::size_t start = 0;
    while (true) {
      const auto comma = body.find(',', start);
      const std::string entry = body.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      std::smatch m;
      if (!std::regex_match(entry, m, entry_re)) {
        const auto b = entry.find_first_not_of(" \t");
        const auto shown = b == std::string::npos ? std::string() : entry.substr(b, entry.find_last_not_of(" \t") - b + 1);
        return wrong_syntax("bad entry '" + shown + "'");
      }
      const std::string name = lowercase(m[2].str());
      std::optional<std::string> item;
      for (const auto& candidate : inst.items) {
        if (name == lowercase(candidate) || name == lowercase(inst.plurals.at(candidate))) item = candidate;
      }
      if (!item) return nonexistent_items("unknown item '" + m[2].str() + "'");
      std::int64_t n = 0;
      try {
        n = std::stoll(m[1].str());
      } catch (const std::out_of_range&) {
        return nonexistent_items("count out of range");
      }
      counts[*item] += n;
      if (counts[*item] > inst.pool.at(*item)) return nonexistent_items("more '" + *item + "' than available");
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  u.proposal = counts;
  return u;
}

// --- Turn policy ----------------------------------------------------------------

enum class Directive { free_exchange, timeout, other_proposed };

struct TurnState {
  int max_messages = 5;
  std::array<int, 2> sent{0, 0};
  std::array<bool, 2> proposed{false, false};
  std::array<bool, 2> must_propose{false, false};

  // Directive issued to the next player after `seat` sent a free message.
  Directive after_message(Seat seat) {
    ++sent[index(seat)];
    if (sent[0] >= max_messages && sent[1] >= max_messages) {
      must_propose[index(other(seat))] = true;
      return Directive::timeout;
    }
    return Directive::free_exchange;
  }

  Directive after_proposal(Seat seat) {
    proposed[index(seat)] = true;
    if (proposed[index(other(seat))]) return Directive::free_exchange;
    must_propose[index(other(seat))] = true;
    return Directive::other_proposed;
  }

  bool done() const { return proposed[0] && proposed[1]; }
};

// --- Judging and scoring ----------------------------------------------------------

struct Judgment {
  bool compatible = false;
  Payoffs payoffs{0, 0};
};

inline std::int64_t dot(const ItemCounts& counts, const ValueMap& values) {
  std::int64_t total = 0;
  for (const auto& [item, n] : counts) total += n * values.at(item);
  return total;
}

inline Judgment judge(const ItemCounts& prop_a, const ItemCounts& prop_b, const ItemCounts& pool,
                      const ValueMap& values_a, const ValueMap& values_b) {
  for (const auto& [item, available] : pool) {
    const auto a = prop_a.count(item) ? prop_a.at(item) : 0;
    const auto b = prop_b.count(item) ? prop_b.at(item) : 0;
    if (a + b > available) return {false, {0, 0}};
  }
  return {true, {dot(prop_a, values_a), dot(prop_b, values_b)}};
}

inline double score(Mode mode, const Payoffs& payoffs, const optimize::AllocationScan& scan) {
  if (scan.max_total == 0) throw DegenerateInstance("dond: max_total is 0");
  if (mode == Mode::cooperative)
    return 100.0 * static_cast<double>(payoffs.first + payoffs.second) / static_cast<double>(scan.max_total);
  const auto mpi = optimize::max_pareto_improvement(scan, payoffs);
  return 100.0 * (1.0 - static_cast<double>(mpi) / static_cast<double>(std::max(scan.max_a, scan.max_b)));
}

inline optimize::AllocationScan scan(const Instance& inst) {
  return optimize::dond_allocation_scan(inst.pool, inst.values_a, inst.values_b);
}

enum class Outcome { optimal, suboptimal, failed, aborted };
NLOHMANN_JSON_SERIALIZE_ENUM(Outcome, {{Outcome::optimal, "optimal"},
                                       {Outcome::suboptimal, "suboptimal"},
                                       {Outcome::failed, "failed"},
                                       {Outcome::aborted, "aborted"}})

inline Outcome classify(const EpisodeRecord& r) {
  if (r.status == Status::aborted) return Outcome::aborted;
  if (!r.details.value("compatible", false)) return Outcome::failed;
  if (*r.quality == 100.0) return Outcome::optimal;
  return Outcome::suboptimal;
}

struct Stats {
  double percent_agreement = 0.0;  // compatible proposals, over all episodes
  double percent_optimal = 0.0;
  double avg_messages = 0.0;  // free messages per episode
  std::map<std::string, std::int64_t> outcomes;
};

inline Stats stats(const std::vector<EpisodeRecord>& records) {
  Stats s;
  if (records.empty()) return s;
  std::int64_t agreed = 0, optimal = 0, messages = 0;
  for (const auto& r : records) {
    const auto o = classify(r);
    ++s.outcomes[json(o).get<std::string>()];
    if (o == Outcome::optimal || o == Outcome::suboptimal) ++agreed;
    if (o == Outcome::optimal) ++optimal;
    if (r.details.contains("messages")) {
      for (const auto& n : r.details.at("messages")) messages += n.get<std::int64_t>();
    }
  }
  const auto n = static_cast<double>(records.size());
  s.percent_agreement = 100.0 * static_cast<double>(agreed) / n;
  s.percent_optimal = 100.0 * static_cast<double>(optimal) / n;
  s.avg_messages = static_cast<double>(messages) / n;
  return s;
}

// --- Episode loop -----------------------------------------------------------------

inline void play(Episode& ep, const Instance& inst, const Templates& t = Templates::builtin()) {
  inst.validate();
  const auto oracle = scan(inst);
  auto& details = ep.record().details;
  details["max_total"] = oracle.max_total;
  details["max_a"] = oracle.max_a;
  details["max_b"] = oracle.max_b;

  ep.to_player(Seat::A, initial_prompt(inst, Seat::A, t));
  ep.to_player(Seat::B, initial_prompt(inst, Seat::B, t));

  TurnState state;
  state.max_messages = inst.max_messages_each;
  std::array<ItemCounts, 2> proposals;
  Seat current = Seat::A;
  auto store_messages = [&] { details["messages"] = {state.sent[0], state.sent[1]}; };

  while (!state.done()) {
    const bool required = state.must_propose[index(current)];
    auto validate = [&](const std::string& text) -> Validated<Utterance> {
      auto parsed = parse_reply(text, inst, t);
      if (auto* u = std::get_if<Utterance>(&parsed); u && required && u->kind != Utterance::Kind::proposal)
        return Violation{"missing_proposal", "A secret proposal was required but not given.", "game"};
      return parsed;
    };
    auto res = retry_loop<Utterance>(ep, current, validate, [](const Violation& v) { return v.message; },
                                     RetryPolicy{1});
    if (res.kind == Resolution::transport_failure) {
      store_messages();
      ep.finish_aborted("transport_failure");
      return;
    }
    if (res.kind != Resolution::accepted) {
      store_messages();
      ep.finish_aborted(res.last_violation->reason);
      return;
    }
    const auto& u = *res.value;
    if (u.kind == Utterance::Kind::proposal) {
      proposals[index(current)] = *u.proposal;
      details[current == Seat::A ? "proposal_a" : "proposal_b"] = *u.proposal;
      ep.note_state(std::string("secret proposal by ") + seat_name(current), {{"seat", seat_name(current)}});
      if (state.after_proposal(current) == Directive::other_proposed)
        ep.to_player(other(current), t.get(inst.locale, "dond.other_proposed"));
    } else {
      ep.relay(current, u.text);
      if (state.after_message(current) == Directive::timeout)
        ep.to_player(other(current), t.get(inst.locale, "dond.timeout"));
    }
    current = other(current);
  }

  store_messages();
  const auto j = judge(proposals[0], proposals[1], inst.pool, inst.values_a, inst.values_b);
  const double quality = score(inst.mode, j.payoffs, oracle);
  details["compatible"] = j.compatible;
  details["payoffs"] = {j.payoffs.first, j.payoffs.second};
  details["mpi"] = optimize::max_pareto_improvement(oracle, j.payoffs);
  ep.note_score(j.compatible ? "compatible proposals" : "conflicting proposals",
                {{"score_a", std::to_string(j.payoffs.first)}, {"score_b", std::to_string(j.payoffs.second)}});
  ep.finish_played(EndState::goal, quality);
  details["outcome"] = classify(ep.record());
}

}  // namespace negobench::dond
