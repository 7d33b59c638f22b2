#pragma once

// Game-agnostic episode machinery: the agent seam, the per-episode message
// channels owned by the Game Master, and the shared retry/penalty policy.

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "negobench/error.hpp"
#include "negobench/record.hpp"

namespace negobench {

enum class Seat { A = 0, B = 1 };

inline Seat other(Seat s) { return s == Seat::A ? Seat::B : Seat::A; }
inline std::size_t index(Seat s) { return static_cast<std::size_t>(s); }
inline const char* seat_name(Seat s) { return s == Seat::A ? "A" : "B"; }

struct ChatMessage {
  std::string role;  // "user" (from the Game Master) or "assistant" (own replies)
  std::string content;
  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct AgentReply {
  std::string text;
  std::string reasoning;  // hidden channel; transcript-only
  TokenUsage usage;
};

// A player. `act` sees the player's own conversation so far, ending with a
// user turn. Remote implementations throw TransportError when the backend
// is unusable.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual AgentReply act(const std::vector<ChatMessage>& history) = 0;
  virtual std::string name() const = 0;
};

struct Violation {
  std::string reason;    // taxonomy code, e.g. "wrong_syntax"
  std::string message;   // human-readable reason text shown to the player
  std::string category;  // coarse class used for breakdowns (e.g. "format", "move")
  friend bool operator==(const Violation&, const Violation&) = default;
};

template <class T>
using Validated = std::variant<T, Violation>;

// Shared violation counter for games that penalize instead of aborting.
struct PenaltyLedger {
  int count = 0;
  int max = 0;
  std::map<std::string, int> by_category;

  void add(const Violation& v) {
    ++count;
    ++by_category[v.category];
  }
  bool exceeded() const { return count > max; }
};

struct RetryPolicy {
  int max_attempts = 1;                // 0 means unbounded
  PenaltyLedger* penalties = nullptr;  // when set, each violation is charged here
};

enum class Resolution { accepted, attempts_exhausted, penalty_limit, transport_failure };

template <class T>
struct TurnResolution {
  Resolution kind = Resolution::accepted;
  int attempts = 0;
  std::optional<T> value;
  std::string reply;  // last raw reply text
  std::optional<Violation> last_violation;
  std::string transport_error;
};

struct EpisodeOptions {
  bool timestamps = false;  // wall-clock meta on agent calls; off keeps reruns byte-identical
};

// One episode's channels. Game Master text addressed to a player is
// buffered until that player is asked to act, then delivered as one user
// turn.
class Episode {
 public:
  Episode(EpisodeRecord& record, Agent& a, Agent& b, EpisodeOptions options = {})
      : record_(record), agents_{&a, &b}, options_(options) {}

  EpisodeRecord& record() { return record_; }
  const std::vector<ChatMessage>& history(Seat s) const { return history_[index(s)]; }

  void to_player(Seat s, const std::string& text, EventKind kind = EventKind::prompt) {
    push(Actor::game_master, s == Seat::A ? Channel::gm_to_a : Channel::gm_to_b, kind, text);
    queue(s, text);
  }

  // Forwards player text to the opponent. Games that wrap relayed text in
  // their own prompt log the relay with deliver = false.
  void relay(Seat from, const std::string& text, bool deliver = true) {
    push(from == Seat::A ? Actor::player_a : Actor::player_b, from == Seat::A ? Channel::a_to_b : Channel::b_to_a,
         EventKind::message, text);
    if (deliver) queue(other(from), text);
  }

  void note_violation(Seat s, const Violation& v) {
    push(Actor::game_master, s == Seat::A ? Channel::gm_to_a : Channel::gm_to_b, EventKind::violation, v.message,
         {{"reason", v.reason}, {"category", v.category}});
  }

  void note_state(const std::string& text, std::map<std::string, std::string> meta = {}) {
    push(Actor::game_master, Channel::gm_to_a, EventKind::state_change, text, std::move(meta));
  }

  void note_score(const std::string& text, std::map<std::string, std::string> meta = {}) {
    push(Actor::game_master, Channel::gm_to_a, EventKind::score, text, std::move(meta));
  }

  // Delivers pending text and invokes the agent. Returns nullopt (and
  // records the failure) when the agent's transport fails.
  std::optional<AgentReply> ask(Seat s, EventKind reply_kind = EventKind::message) {
    auto& pending = pending_[index(s)];
    if (!pending.empty()) {
      history_[index(s)].push_back({"user", pending});
      pending.clear();
    }
    const auto start = std::chrono::steady_clock::now();
    AgentReply reply;
    try {
      reply = agents_[index(s)]->act(history_[index(s)]);
    } catch (const TransportError& e) {
      last_transport_error_ = e.what();
      return std::nullopt;
    }
    history_[index(s)].push_back({"assistant", reply.text});

    auto& meta = record_.players[index(s)];
    meta.usage += reply.usage;
    ++meta.calls;
    meta.reasoning_chars += static_cast<std::int64_t>(reply.reasoning.size());
    if (!reply.reasoning.empty()) ++meta.reasoning_turns;

    std::map<std::string, std::string> event_meta;
    if (!reply.reasoning.empty()) event_meta["reasoning"] = reply.reasoning;
    if (reply.usage.prompt_tokens || reply.usage.completion_tokens || reply.usage.reasoning_tokens) {
      event_meta["prompt_tokens"] = std::to_string(reply.usage.prompt_tokens);
      event_meta["completion_tokens"] = std::to_string(reply.usage.completion_tokens);
      event_meta["reasoning_tokens"] = std::to_string(reply.usage.reasoning_tokens);
    }
    if (options_.timestamps) {
      const auto ms =
          std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
      event_meta["wall_clock_ms"] = std::to_string(ms);
    }
    push(s == Seat::A ? Actor::player_a : Actor::player_b, s == Seat::A ? Channel::a_to_gm : Channel::b_to_gm,
         reply_kind, reply.text, std::move(event_meta));
    return reply;
  }

  const std::string& last_transport_error() const { return last_transport_error_; }

  void finish_played(EndState end, double quality) {
    record_.status = Status::played;
    record_.end_state = end;
    record_.quality = quality;
    record_.abort_reason.reset();
  }

  void finish_aborted(const std::string& reason) {
    record_.status = Status::aborted;
    record_.end_state = EndState::abort;
    record_.quality.reset();
    record_.abort_reason = reason;
  }

 private:
  void push(Actor actor, Channel channel, EventKind kind, const std::string& content,
            std::map<std::string, std::string> meta = {}) {
    Event e;
    e.seq = next_seq_++;
    e.actor = actor;
    e.channel = channel;
    e.kind = kind;
    e.content = content;
    e.meta = std::move(meta);
    record_.events.push_back(std::move(e));
  }

  void queue(Seat s, const std::string& text) {
    auto& pending = pending_[index(s)];
    if (!pending.empty()) pending += "\n\n";
    pending += text;
  }

  EpisodeRecord& record_;
  std::array<Agent*, 2> agents_;
  EpisodeOptions options_;
  std::array<std::vector<ChatMessage>, 2> history_;
  std::array<std::string, 2> pending_;
  std::int64_t next_seq_ = 0;
  std::string last_transport_error_;
};

// Asks `seat` until its reply validates, the attempt budget runs out, or the
// shared penalty ledger overflows. `validate` maps reply text to
// Validated<T>; `reprompt` renders the error prompt for a violation after
// the ledger has been charged.
template <class T, class Validate, class Reprompt>
TurnResolution<T> retry_loop(Episode& ep, Seat seat, Validate&& validate, Reprompt&& reprompt,
                             const RetryPolicy& policy, EventKind reply_kind = EventKind::message) {
  TurnResolution<T> res;
  while (true) {
    ++res.attempts;
    auto reply = ep.ask(seat, reply_kind);
    if (!reply) {
      res.kind = Resolution::transport_failure;
      res.transport_error = ep.last_transport_error();
      return res;
    }
    res.reply = reply->text;
    Validated<T> outcome = validate(reply->text);
    if (auto* ok = std::get_if<T>(&outcome)) {
      res.kind = Resolution::accepted;
      res.value = std::move(*ok);
      return res;
    }
    const Violation v = std::get<Violation>(std::move(outcome));
    ep.note_violation(seat, v);
    res.last_violation = v;
    if (policy.penalties) {
      policy.penalties->add(v);
      if (policy.penalties->exceeded()) {
        res.kind = Resolution::penalty_limit;
        return res;
      }
    }
    if (policy.max_attempts > 0 && res.attempts >= policy.max_attempts) {
      res.kind = Resolution::attempts_exhausted;
      return res;
    }
    ep.to_player(seat, reprompt(v));
  }
}

}  // namespace negobench
