#pragma once

// Air Balloon Survival: two players negotiate one item set under a weight
// limit using tagged messages. Proposals stay active until the opponent
// refuses them; the game ends when one side agrees to an active proposal.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "negobench/engine.hpp"
#include "negobench/error.hpp"
#include "negobench/optimize.hpp"
#include "negobench/record.hpp"
#include "negobench/rng.hpp"
#include "negobench/templates.hpp"

namespace negobench::balloon {

using optimize::ValueMap;
using ItemSet = std::set<std::string>;

enum class GoalMode { common, opposing };
NLOHMANN_JSON_SERIALIZE_ENUM(GoalMode, {{GoalMode::common, "common"}, {GoalMode::opposing, "opposing"}})

struct Item {
  std::string name;
  std::int64_t weight = 0;
  friend bool operator==(const Item&, const Item&) = default;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Item, name, weight)

inline bool is_generated_name(const std::string& s) {
  return s.size() == 3 && std::isupper(static_cast<unsigned char>(s[0])) &&
         std::isdigit(static_cast<unsigned char>(s[1])) && std::isdigit(static_cast<unsigned char>(s[2]));
}

struct Instance {
  std::vector<Item> items;  // display order
  std::int64_t limit = 0;
  ValueMap prefs_a, prefs_b;
  GoalMode goal_mode = GoalMode::common;
  bool require_argument = false;
  bool strategic_reasoning = false;
  Locale locale = Locale::en;

  const ValueMap& prefs(Seat s) const { return s == Seat::A ? prefs_a : prefs_b; }
  int n_items() const { return static_cast<int>(items.size()); }

  bool has(const std::string& name) const {
    return std::any_of(items.begin(), items.end(), [&](const Item& it) { return it.name == name; });
  }

  std::int64_t total_weight() const {
    std::int64_t s = 0;
    for (const auto& it : items) s += it.weight;
    return s;
  }

  // Unknown names are ignored; callers check membership first.
  std::int64_t weight_of(const ItemSet& set) const {
    std::int64_t s = 0;
    for (const auto& it : items)
      if (set.count(it.name)) s += it.weight;
    return s;
  }

  std::int64_t value_of(const ItemSet& set, Seat s) const {
    std::int64_t v = 0;
    for (const auto& name : set)
      if (auto it = prefs(s).find(name); it != prefs(s).end()) v += it->second;
    return v;
  }

  optimize::KnapsackInstance knapsack() const {
    optimize::KnapsackInstance k;
    k.capacity = limit;
    for (const auto& it : items) k.items.push_back({it.name, it.weight, prefs_a.at(it.name), prefs_b.at(it.name)});
    return k;
  }

  // Name shape is a generator property; hand-built instances may
  // use plain words.
  void validate() const {
    if (items.empty()) throw InvalidInput("balloon: instance has no items");
    std::set<std::string> seen;
    for (const auto& it : items) {
      if (it.name.empty() || !seen.insert(it.name).second)
        throw InvalidInput("balloon: item names must be nonempty and unique");
      if (it.weight < 1) throw InvalidInput("balloon: item weights must be positive");
      if (!prefs_a.count(it.name) || !prefs_b.count(it.name))
        throw InvalidInput("balloon: preference maps must cover item '" + it.name + "'");
      if (prefs_a.at(it.name) < 1 || prefs_b.at(it.name) < 1)
        throw InvalidInput("balloon: preferences must be positive");
    }
    if (prefs_a.size() != items.size() || prefs_b.size() != items.size())
      throw InvalidInput("balloon: preference maps name unknown items");
    if (limit < 1 || limit >= total_weight()) throw InvalidInput("balloon: need 0 < LIMIT < total weight");
    if (goal_mode == GoalMode::common && prefs_a != prefs_b)
      throw InvalidInput("balloon: common goal requires identical preferences");
  }

  friend bool operator==(const Instance&, const Instance&) = default;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Instance, items, limit, prefs_a, prefs_b, goal_mode, require_argument,
                                   strategic_reasoning, locale)

struct GeneratorConfig {
  double capacity_fraction = 0.5;
  int max_weight = 10;
  int max_pref = 10;
};

struct Flags {
  bool strategic_reasoning = false;
  bool require_argument = false;
};

inline Instance generate_instance(Rng& rng, int n_items, GoalMode mode, Flags flags = {},
                                  const GeneratorConfig& cfg = {}, Locale locale = Locale::en) {
  if (n_items != 15 && n_items != 35) throw InvalidInput("balloon: n_items must be 15 or 35");
  std::vector<std::string> names;
  for (char c = 'A'; c <= 'Z'; ++c)
    for (int d = 0; d < 100; ++d) names.push_back(std::string(1, c) + (d < 10 ? "0" : "") + std::to_string(d));

  Instance inst;
  inst.goal_mode = mode;
  inst.strategic_reasoning = flags.strategic_reasoning;
  inst.require_argument = flags.require_argument;
  inst.locale = locale;
  for (auto& name : rng.sample(names, static_cast<std::size_t>(n_items)))
    inst.items.push_back({name, rng.uniform(1, cfg.max_weight)});
  for (const auto& it : inst.items) {
    const auto p = rng.uniform(1, cfg.max_pref);
    inst.prefs_a[it.name] = p;
    // Reflection keeps the value range and reverses the order exactly.
    inst.prefs_b[it.name] = mode == GoalMode::common ? p : cfg.max_pref + 1 - p;
  }
  inst.limit = std::max<std::int64_t>(
      1, std::llround(cfg.capacity_fraction * static_cast<double>(inst.total_weight())));
  inst.limit = std::min(inst.limit, inst.total_weight() - 1);
  inst.validate();
  return inst;
}

struct Experiment {
  std::string name;
  int n_items;
  GoalMode mode;
  Flags flags;
};

inline std::vector<Experiment> default_experiments() {
  return {
      {"15_common_sr", 15, GoalMode::common, {true, false}},
      {"15_opposing_sr", 15, GoalMode::opposing, {true, false}},
      {"15_common", 15, GoalMode::common, {false, false}},
      {"15_opposing", 15, GoalMode::opposing, {false, false}},
      {"35_common_sr", 35, GoalMode::common, {true, false}},
      {"35_opposing_sr", 35, GoalMode::opposing, {true, false}},
  };
}

// --- prompts ----------------------------------------------------------------

// "{'A42', 'C07'}" in instance order.
inline std::string set_text(const Instance& inst, const ItemSet& set) {
  std::string out = "{";
  for (const auto& it : inst.items) {
    if (!set.count(it.name)) continue;
    if (out.size() > 1) out += ", ";
    out += "'" + it.name + "'";
  }
  return out + "}";
}

inline std::string mapping_text(const Instance& inst, const ValueMap* prefs) {
  std::string out = "{";
  for (const auto& it : inst.items) {
    if (out.size() > 1) out += ", ";
    out += "'" + it.name + "': " + std::to_string(prefs ? prefs->at(it.name) : it.weight);
  }
  return out + "}";
}

inline std::string initial_prompt(const Instance& inst, Seat s, const Templates& t = Templates::builtin()) {
  const auto& key = [&](const char* k) -> std::string { return t.get(inst.locale, k); };
  return render(key("balloon.initial"),
                {{"$LIMIT$", std::to_string(inst.limit)},
                 {"$ITEM_WEIGHTS$", mapping_text(inst, nullptr)},
                 {"$UTILITY_SCALE_PLAYER$", mapping_text(inst, &inst.prefs(s))},
                 {"$STRATEGIC_REASONING_FORMAT$", inst.strategic_reasoning ? key("balloon.sr_format") : ""},
                 {"$REQUIRE_ARGUMENT$", inst.require_argument ? key("balloon.require_argument") : ""},
                 {"$STRATEGIC_REASONING_RULE$", inst.strategic_reasoning ? key("balloon.sr_rule") : ""}});
}

// --- parsing ----------------------------------------------------------------

enum class Tag { proposal, refuse, argument, agree, strategic_reasoning };

inline const char* tag_name(Tag t) {
  switch (t) {
    case Tag::proposal: return "PROPOSAL";
    case Tag::refuse: return "REFUSE";
    case Tag::argument: return "ARGUMENT";
    case Tag::agree: return "AGREE";
    case Tag::strategic_reasoning: return "STRATEGIC REASONING";
  }
  return "";
}

inline bool set_valued(Tag t) { return t == Tag::proposal || t == Tag::refuse || t == Tag::agree; }

struct Part {
  Tag tag = Tag::argument;
  std::string payload;  // raw text after "TAG:", trimmed
  std::string raw;      // the whole part as written
  ItemSet items;        // set-valued tags only
  friend bool operator==(const Part&, const Part&) = default;
};

struct TaggedMessage {
  std::vector<Part> parts;

  int count(Tag t) const {
    return static_cast<int>(std::count_if(parts.begin(), parts.end(), [&](const Part& p) { return p.tag == t; }));
  }

  // What the opponent sees: everything except strategic reasoning.
  std::string relay_text() const {
    std::string out;
    for (const auto& p : parts) {
      if (p.tag == Tag::strategic_reasoning) continue;
      if (!out.empty()) out += "\n";
      out += p.raw;
    }
    return out;
  }

  std::string hidden_text() const {
    for (const auto& p : parts)
      if (p.tag == Tag::strategic_reasoning) return p.payload;
    return "";
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

inline std::optional<Tag> tag_at(const std::string& text, std::size_t pos, std::size_t& after) {
  if (pos > 0 && std::isalnum(static_cast<unsigned char>(text[pos - 1]))) return std::nullopt;
  for (Tag t : {Tag::strategic_reasoning, Tag::proposal, Tag::refuse, Tag::argument, Tag::agree}) {
    const std::string name = std::string(tag_name(t)) + ":";
    if (text.compare(pos, name.size(), name) == 0) {
      after = pos + name.size();
      return t;
    }
  }
  return std::nullopt;
}

// Parses "{'a', "b"}" with zero or more quoted strings.
inline std::optional<ItemSet> parse_set(const std::string& s) {
  if (s.size() < 2 || s.front() != '{' || s.back() != '}') return std::nullopt;
  ItemSet out;
  std::size_t i = 1;
  const std::size_t end = s.size() - 1;
  auto skip = [&] {
    while (i < end && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  };
  skip();
  if (i == end) return out;
  while (true) {
    skip();
    if (i >= end || (s[i] != '\'' && s[i] != '"')) return std::nullopt;
    const char q = s[i++];
    const auto close = s.find(q, i);
    if (close == std::string::npos || close >= end) return std::nullopt;
    out.insert(s.substr(i, close - i));
    i = close + 1;
    skip();
    if (i == end) return out;
    if (s[i] != ',') return std::nullopt;
    ++i;
    skip();
    if (i == end) return out;  // trailing comma
  }
}

inline bool braced(const std::string& s) {
  if (s.size() < 2 || s.front() != '{' || s.back() != '}') return false;
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '{') ++depth;
    if (s[i] == '}' && --depth == 0 && i + 1 != s.size()) return false;
  }
  return depth == 0;
}

}  // namespace detail

inline Violation parse_error(const std::string& reason, const Instance& inst, const Templates& t,
                             const std::string& tag = "") {
  auto msg = t.get(inst.locale, "balloon.err." + reason);
  if (!tag.empty()) msg = render(msg, {{"<TAG>", tag}});
  return {reason, msg, "parse"};
}

inline Violation game_error(const std::string& reason, const Instance& inst, const Templates& t) {
  return {reason, t.get(inst.locale, "balloon.err." + reason), "game"};
}

// Splits a reply into TAG: {...} parts. Tags are recognised only outside
// braces, so free text inside an ARGUMENT may mention PROPOSAL: safely.
inline Validated<TaggedMessage> parse_reply(const std::string& text, const Instance& inst,
                                            const Templates& t = Templates::builtin()) {
  struct Span {
    Tag tag;
    std::size_t start, body;
  };
  std::vector<Span> spans;
  int depth = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '{') ++depth;
    else if (text[i] == '}') depth = std::max(0, depth - 1);
    else if (depth == 0) {
      std::size_t after = 0;
      if (auto tag = detail::tag_at(text, i, after)) {
        spans.push_back({*tag, i, after});
        i = after - 1;
      }
    }
  }
  const bool leading_junk = !detail::trim(text.substr(0, spans.empty() ? text.size() : spans[0].start)).empty();

  TaggedMessage msg;
  bool malformed_text = false;
  std::optional<std::string> bad_set;
  for (std::size_t k = 0; k < spans.size(); ++k) {
    const auto end = k + 1 < spans.size() ? spans[k + 1].start : text.size();
    Part p;
    p.tag = spans[k].tag;
    p.payload = detail::trim(text.substr(spans[k].body, end - spans[k].body));
    p.raw = detail::trim(text.substr(spans[k].start, end - spans[k].start));
    if (set_valued(p.tag)) {
      if (auto set = detail::parse_set(p.payload)) p.items = std::move(*set);
      else if (!bad_set) bad_set = tag_name(p.tag);
    } else if (!detail::braced(p.payload)) {
      malformed_text = true;
    }
    msg.parts.push_back(std::move(p));
  }

  if (inst.strategic_reasoning &&
      (leading_junk || msg.parts.empty() || msg.parts[0].tag != Tag::strategic_reasoning))
    return parse_error("missing_sr", inst, t);
  if (leading_junk || msg.parts.empty() || malformed_text || msg.count(Tag::strategic_reasoning) > 1)
    return parse_error("untagged", inst, t);
  if (inst.require_argument && msg.count(Tag::argument) == 0) return parse_error("missing_argument", inst, t);
  if (msg.count(Tag::strategic_reasoning) == static_cast<int>(msg.parts.size()))
    return parse_error("only_sr", inst, t);
  if (bad_set) return parse_error("invalid_set", inst, t, *bad_set);
  return msg;
}

// --- negotiation state ------------------------------------------------------

struct ProposalEvent {
  Seat seat = Seat::A;
  ItemSet items;
  int turn = 0;
  friend bool operator==(const ProposalEvent&, const ProposalEvent&) = default;
};

struct State {
  std::array<std::vector<ItemSet>, 2> active;
  std::vector<ProposalEvent> history;
  std::optional<ItemSet> deal;
  int turns_without_progress = 0;
  int turn = 0;

  bool is_active(Seat owner, const ItemSet& s) const {
    const auto& a = active[index(owner)];
    return std::find(a.begin(), a.end(), s) != a.end();
  }

  bool seen(const ItemSet& s) const {
    return std::any_of(history.begin(), history.end(), [&](const ProposalEvent& e) { return e.items == s; });
  }
};

// Checks the whole message against the current state before changing
// anything, so a rejected reply leaves the state untouched.
inline Validated<State> apply_message(const State& state, const TaggedMessage& msg, const Instance& inst, Seat sender,
                                      const Templates& t = Templates::builtin()) {
  if (msg.count(Tag::agree) > 1) return game_error("multiple_agree", inst, t);
  const Seat opp = other(sender);
  for (const auto& p : msg.parts) {
    if (p.tag == Tag::proposal) {
      for (const auto& name : p.items)
        if (!inst.has(name)) return game_error("unknown_items", inst, t);
      if (inst.weight_of(p.items) > inst.limit) return game_error("over_limit", inst, t);
    } else if (p.tag == Tag::refuse) {
      if (!state.is_active(opp, p.items)) return game_error("refuse_inactive", inst, t);
    } else if (p.tag == Tag::agree) {
      if (!state.is_active(opp, p.items)) return game_error("agree_inactive", inst, t);
    }
  }

  State next = state;
  bool progress = false;
  for (const auto& p : msg.parts) {
    if (p.tag == Tag::proposal) {
      if (!next.seen(p.items)) progress = true;
      next.history.push_back({sender, p.items, state.turn});
      if (!next.is_active(sender, p.items)) next.active[index(sender)].push_back(p.items);
    } else if (p.tag == Tag::refuse) {
      auto& a = next.active[index(opp)];
      a.erase(std::remove(a.begin(), a.end(), p.items), a.end());
    } else if (p.tag == Tag::agree) {
      next.deal = p.items;
      progress = true;
    }
  }
  next.turns_without_progress = progress ? 0 : state.turns_without_progress + 1;
  next.turn = state.turn + 1;
  return next;
}

// --- scoring ----------------------------------------------------------------

struct Score {
  double f_a = 0, f_b = 0, f_harm = 0, opt_star = 0, quality = 0;
  std::int64_t opt_a = 0, opt_b = 0;
};

inline Score score(const ItemSet& deal, const Instance& inst) {
  const auto k = inst.knapsack();
  Score s;
  s.opt_a = optimize::knapsack_opt(k, optimize::Side::A).value;
  s.opt_b = optimize::knapsack_opt(k, optimize::Side::B).value;
  s.opt_star = optimize::max_harmonic_mean(optimize::payoff_front(k), s.opt_a, s.opt_b);
  if (s.opt_star <= 0.0) throw DegenerateInstance("balloon: OPT* is zero");
  if (inst.weight_of(deal) > inst.limit) return s;
  s.f_a = 100.0 * static_cast<double>(inst.value_of(deal, Seat::A)) / static_cast<double>(s.opt_a);
  s.f_b = 100.0 * static_cast<double>(inst.value_of(deal, Seat::B)) / static_cast<double>(s.opt_b);
  s.f_harm = optimize::harmonic_mean(s.f_a, s.f_b);
  s.quality = std::clamp(100.0 * s.f_harm / s.opt_star, 0.0, 100.0);
  return s;
}

// --- game loop --------------------------------------------------------------

struct Rules {
  int max_attempts = 3;
  int stagnation_turns = 8;
  int max_turns = 100;
};

inline json set_json(const Instance& inst, const ItemSet& s) {
  json out = json::array();
  for (const auto& it : inst.items)
    if (s.count(it.name)) out.push_back(it.name);
  return out;
}

inline void play(Episode& ep, const Instance& inst, const Templates& t = Templates::builtin(), Rules rules = {}) {
  inst.validate();
  auto& details = ep.record().details;
  State state;

  auto store = [&] {
    json props = json::array();
    for (const auto& e : state.history)
      props.push_back({{"seat", seat_name(e.seat)}, {"items", set_json(inst, e.items)}, {"turn", e.turn}});
    details["proposals"] = props;
    details["turns"] = state.turn;
  };

  ep.to_player(Seat::A, initial_prompt(inst, Seat::A, t));
  ep.to_player(Seat::B, initial_prompt(inst, Seat::B, t));

  Seat current = Seat::A;
  while (true) {
    State candidate;
    auto validate = [&](const std::string& text) -> Validated<TaggedMessage> {
      auto parsed = parse_reply(text, inst, t);
      if (auto* m = std::get_if<TaggedMessage>(&parsed)) {
        auto applied = apply_message(state, *m, inst, current, t);
        if (auto* v = std::get_if<Violation>(&applied)) return *v;
        candidate = std::get<State>(std::move(applied));
      }
      return parsed;
    };
    auto res = retry_loop<TaggedMessage>(ep, current, validate, [](const Violation& v) { return v.message; },
                                         RetryPolicy{rules.max_attempts}, EventKind::message);
    if (res.kind == Resolution::transport_failure) {
      store();
      ep.finish_aborted("transport_failure");
      return;
    }
    if (res.kind != Resolution::accepted) {
      store();
      ep.finish_aborted("protocol_violation");
      return;
    }
    state = std::move(candidate);
    const auto& msg = *res.value;
    if (const auto hidden = msg.hidden_text(); !hidden.empty())
      ep.note_state("strategic reasoning withheld", {{"seat", seat_name(current)}, {"strategic_reasoning", hidden}});
    ep.relay(current, msg.relay_text());

    if (state.deal) {
      store();
      const auto s = score(*state.deal, inst);
      details["deal"] = set_json(inst, *state.deal);
      details["deal_weight"] = inst.weight_of(*state.deal);
      details["f_a"] = s.f_a;
      details["f_b"] = s.f_b;
      details["f_harm"] = s.f_harm;
      details["opt_a"] = s.opt_a;
      details["opt_b"] = s.opt_b;
      details["opt_star"] = s.opt_star;
      ep.note_score("deal " + set_text(inst, *state.deal));
      ep.finish_played(EndState::goal, s.quality);
      return;
    }
    if (state.turns_without_progress >= rules.stagnation_turns) {
      store();
      ep.finish_aborted("no_progress");
      return;
    }
    if (state.turn >= rules.max_turns) {
      store();
      ep.finish_aborted("turn_limit");
      return;
    }
    current = other(current);
  }
}

}  // namespace negobench::balloon
