#pragma once

// Scripted reference players. Each one sees only its own seat's view of the
// instance plus its conversation history, and is deterministic.

#include <memory>
#include <regex>
#include <string>
#include <variant>
#include <vector>

#include "negobench/balloon.hpp"
#include "negobench/cleanup.hpp"
#include "negobench/dond.hpp"
#include "negobench/engine.hpp"
#include "negobench/optimize.hpp"

namespace negobench {

using AnyInstance = std::variant<dond::Instance, cleanup::Instance, balloon::Instance>;

inline Game game_of(const AnyInstance& inst) {
  switch (inst.index()) {
    case 0: return Game::dond;
    case 1: return Game::cleanup;
    default: return Game::balloon;
  }
}

namespace scripted {

inline const std::string& last_user(const std::vector<ChatMessage>& history) {
  static const std::string empty;
  for (auto it = history.rbegin(); it != history.rend(); ++it)
    if (it->role == "user") return it->content;
  return empty;
}

inline int own_turns(const std::vector<ChatMessage>& history) {
  int n = 0;
  for (const auto& m : history) n += m.role == "assistant";
  return n;
}

// --- Deal or No Deal --------------------------------------------------------

inline std::string dond_offer(const dond::Instance& inst, const optimize::ItemCounts& keep, const Templates& t) {
  std::string body;
  for (const auto& item : inst.items) {
    const auto n = keep.count(item) ? keep.at(item) : 0;
    if (n == 0) continue;
    if (!body.empty()) body += ", ";
    body += std::to_string(n) + " " + (n == 1 ? item : inst.plurals.at(item));
  }
  return "[" + t.get(inst.locale, "dond.keyword") + ": " + body + "]";
}

// Shares its exact values, then both sides submit the same max-total split
// from their own perspective. Ties go to A.
class DondTruthfulCoop : public Agent {
 public:
  DondTruthfulCoop(dond::Instance inst, Seat seat) : inst_(std::move(inst)), seat_(seat) {}

  AgentReply act(const std::vector<ChatMessage>& history) override {
    std::optional<optimize::ValueMap> theirs;
    for (const auto& m : history)
      if (m.role == "user")
        if (auto v = read_values(m.content)) theirs = v;
    if (!sent_) {
      sent_ = true;
      return {values_text(), "", {}};
    }
    const auto& mine = inst_.values(seat_);
    optimize::ItemCounts keep;
    for (const auto& item : inst_.items) {
      if (!theirs) {
        keep[item] = mine.at(item) > 0 ? inst_.pool.at(item) : 0;
        continue;
      }
      const auto me = mine.at(item), them = theirs->at(item);
      const bool mine_wins = me > them || (me == them && seat_ == Seat::A);
      keep[item] = mine_wins ? inst_.pool.at(item) : 0;
    }
    return {dond_offer(inst_, keep, Templates::builtin()), "", {}};
  }

  std::string name() const override { return "dond_truthful_coop"; }

 private:
  std::string values_text() const {
    std::string out = "My values:";
    for (const auto& item : inst_.items) out += " " + item + "=" + std::to_string(inst_.values(seat_).at(item));
    return out;
  }

  std::optional<optimize::ValueMap> read_values(const std::string& text) const {
    const auto at = text.rfind("My values:");
    if (at == std::string::npos) return std::nullopt;
    optimize::ValueMap v;
    static const std::regex pair_re(R"((\S+)=(\d+))");
    const auto line = text.substr(at, text.find('\n', at) - at);
    for (std::sregex_iterator it(line.begin(), line.end(), pair_re), end; it != end; ++it)
      v[(*it)[1].str()] = std::stoll((*it)[2].str());
    for (const auto& item : inst_.items)
      if (!v.count(item)) return std::nullopt;
    return v;
  }

  dond::Instance inst_;
  Seat seat_;
  bool sent_ = false;
};

// Proposes at once: every unit it values at all.
class DondPremature : public Agent {
 public:
  DondPremature(dond::Instance inst, Seat seat) : inst_(std::move(inst)), seat_(seat) {}

  AgentReply act(const std::vector<ChatMessage>&) override {
    optimize::ItemCounts keep;
    for (const auto& item : inst_.items) keep[item] = inst_.values(seat_).at(item) > 0 ? inst_.pool.at(item) : 0;
    return {dond_offer(inst_, keep, Templates::builtin()), "", {}};
  }

  std::string name() const override { return "dond_premature"; }

 private:
  dond::Instance inst_;
  Seat seat_;
};

// --- Clean Up ---------------------------------------------------------------

// A announces its own coordinates as targets and waits; B moves its objects
// there, parking a blocking object on a free non-target cell first.
class CleanupRowAligner : public Agent {
 public:
  CleanupRowAligner(cleanup::Instance inst, Seat seat)
      : inst_(std::move(inst)), seat_(seat), grid_(seat == Seat::A ? inst_.grid_a : inst_.grid_b) {}

  AgentReply act(const std::vector<ChatMessage>& history) override {
    const auto& latest = last_user(history);
    if (seat_ == Seat::A) {
      if (own_turns(history) == 0) return {"SAY: " + targets_text(), "", {}};
      if (latest.find("\"finished?\"") != std::string::npos) return {"SAY: finished!", "", {}};
      return {"SAY: waiting", "", {}};
    }
    if (targets_.empty()) read_targets(latest);
    for (const auto& [id, target] : targets_) {
      const auto here = grid_.objects.at(id);
      if (here == target) continue;
      if (grid_.is_empty(target)) return move(id, target);
      // The cell is held by one of our own objects (the background is shared).
      for (const auto& [other_id, pos] : grid_.objects)
        if (pos == target) return move(other_id, parking_cell());
    }
    return {"SAY: finished?", "", {}};
  }

  std::string name() const override { return "cleanup_row_aligner"; }

 private:
  std::string targets_text() const {
    std::string out = "targets";
    for (const auto& [id, p] : grid_.objects)
      out += " " + id + " (" + std::to_string(p.x) + "," + std::to_string(p.y) + ")";
    return out;
  }

  void read_targets(const std::string& text) {
    static const std::regex target_re(R"(([A-Z]) \((\d+),(\d+)\))");
    const auto at = text.rfind("targets ");
    if (at == std::string::npos) return;
    const auto line = text.substr(at, text.find('\n', at) - at);
    for (std::sregex_iterator it(line.begin(), line.end(), target_re), end; it != end; ++it) {
      const auto id = (*it)[1].str();
      if (grid_.objects.count(id)) targets_[id] = {std::stoi((*it)[2].str()), std::stoi((*it)[3].str())};
    }
  }

  cleanup::Pos parking_cell() const {
    for (const auto& p : grid_.empty_cells()) {
      bool is_target = false;
      for (const auto& [id, t] : targets_) is_target = is_target || t == p;
      if (!is_target) return p;
    }
    throw Error("cleanup_row_aligner: no free parking cell");
  }

  AgentReply move(const std::string& id, cleanup::Pos to) {
    cleanup::Command c;
    c.kind = cleanup::Command::Kind::move;
    c.object = id;
    c.x = to.x;
    c.y = to.y;
    grid_ = cleanup::apply_move(grid_, c);
    return {"MOVE: " + id + ", (" + std::to_string(to.x) + "," + std::to_string(to.y) + ")", "", {}};
  }

  cleanup::Instance inst_;
  Seat seat_;
  cleanup::Grid grid_;
  std::map<std::string, cleanup::Pos> targets_;
};

// --- Air Balloon ------------------------------------------------------------

// Proposes its own knapsack optimum and agrees to any opponent proposal
// within one value point of it.
class BalloonGreedy : public Agent {
 public:
  BalloonGreedy(balloon::Instance inst, Seat seat) : inst_(std::move(inst)), seat_(seat) {
    auto k = inst_.knapsack();
    const auto side = seat == Seat::A ? optimize::Side::A : optimize::Side::B;
    const auto sol = optimize::knapsack_opt(k, side);
    best_value_ = sol.value;
    best_ = balloon::ItemSet(sol.witness.begin(), sol.witness.end());
  }

  AgentReply act(const std::vector<ChatMessage>& history) override {
    std::string relayed = last_user(history);
    if (own_turns(history) == 0) {
      const auto gap = relayed.rfind("\n\n");
      relayed = gap == std::string::npos ? std::string() : relayed.substr(gap + 2);
    }
    std::optional<balloon::ItemSet> acceptable;
    static const std::regex offer_re(R"(PROPOSAL:\s*(\{[^}]*\}))");
    for (std::sregex_iterator it(relayed.begin(), relayed.end(), offer_re), end; it != end; ++it) {
      auto set = balloon::detail::parse_set((*it)[1].str());
      if (!set) continue;
      const bool known = std::all_of(set->begin(), set->end(), [&](const auto& n) { return inst_.has(n); });
      if (known && inst_.weight_of(*set) <= inst_.limit && inst_.value_of(*set, seat_) >= best_value_ - 1)
        acceptable = set;
    }
    std::string body;
    if (acceptable) {
      body = "AGREE: " + balloon::set_text(inst_, *acceptable);
    } else if (!proposed_) {
      proposed_ = true;
      body = "PROPOSAL: " + balloon::set_text(inst_, best_);
    } else {
      body = "ARGUMENT: {'My proposal stands.'}";
    }
    if (inst_.require_argument && body.rfind("ARGUMENT", 0) != 0) body += "\nARGUMENT: {'This set suits me best.'}";
    if (inst_.strategic_reasoning) body = "STRATEGIC REASONING: {'Keep my knapsack optimum.'}\n" + body;
    return {body, "", {}};
  }

  std::string name() const override { return "balloon_greedy"; }

 private:
  balloon::Instance inst_;
  Seat seat_;
  balloon::ItemSet best_;
  std::int64_t best_value_ = 0;
  bool proposed_ = false;
};

}  // namespace scripted

inline const std::vector<std::string>& script_ids() {
  static const std::vector<std::string> ids = {"dond_truthful_coop", "dond_premature", "cleanup_row_aligner",
                                               "balloon_greedy"};
  return ids;
}

inline std::unique_ptr<Agent> make_scripted(const std::string& id, const AnyInstance& inst, Seat seat) {
  auto mismatch = [&] { return InvalidInput("script '" + id + "' does not play this game"); };
  if (id == "dond_truthful_coop" || id == "dond_premature") {
    const auto* d = std::get_if<dond::Instance>(&inst);
    if (!d) throw mismatch();
    if (id == "dond_premature") return std::make_unique<scripted::DondPremature>(*d, seat);
    return std::make_unique<scripted::DondTruthfulCoop>(*d, seat);
  }
  if (id == "cleanup_row_aligner") {
    const auto* c = std::get_if<cleanup::Instance>(&inst);
    if (!c) throw mismatch();
    return std::make_unique<scripted::CleanupRowAligner>(*c, seat);
  }
  if (id == "balloon_greedy") {
    const auto* b = std::get_if<balloon::Instance>(&inst);
    if (!b) throw mismatch();
    return std::make_unique<scripted::BalloonGreedy>(*b, seat);
  }
  throw InvalidInput("unknown script id '" + id + "'");
}

}  // namespace negobench
