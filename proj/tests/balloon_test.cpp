#include <gtest/gtest.h>

#include "negobench/balloon.hpp"
#include "oracles.hpp"
#include "test_agents.hpp"

using namespace negobench;
using namespace negobench::balloon;
using negobench::test::DeadAgent;
using negobench::test::QueueAgent;

namespace {

// Five-item episode with a known best deal {Rope, Ball, Magazine}.
Instance example() {
  Instance inst;
  inst.items = {{"Ball", 2}, {"Book", 3}, {"Magazine", 1}, {"Rope", 4}, {"Lamp", 5}};
  inst.limit = 7;
  inst.prefs_a = {{"Ball", 1}, {"Book", 2}, {"Magazine", 2}, {"Rope", 2}, {"Lamp", 1}};
  inst.prefs_b = {{"Ball", 1}, {"Book", 1}, {"Magazine", 2}, {"Rope", 4}, {"Lamp", 5}};
  inst.goal_mode = GoalMode::opposing;
  return inst;
}

std::string reason_of(const Validated<TaggedMessage>& v) {
  if (!std::holds_alternative<Violation>(v)) return "accepted";
  return std::get<Violation>(v).reason;
}

std::string reason_of(const Validated<State>& v) {
  if (!std::holds_alternative<Violation>(v)) return "accepted";
  return std::get<Violation>(v).reason;
}

TaggedMessage parsed(const std::string& text, const Instance& inst) {
  return std::get<TaggedMessage>(parse_reply(text, inst));
}

State step(const State& s, const std::string& text, const Instance& inst, Seat who) {
  return std::get<State>(apply_message(s, parsed(text, inst), inst, who));
}

}  // namespace

TEST(BalloonScore, ExampleDeal) {
  const auto s = score({"Rope", "Ball", "Magazine"}, example());
  EXPECT_EQ(s.opt_a, 5);
  EXPECT_EQ(s.opt_b, 7);
  EXPECT_DOUBLE_EQ(s.f_a, 100.0);
  EXPECT_DOUBLE_EQ(s.f_b, 100.0);
  EXPECT_NEAR(s.quality, 100.0, 1e-9);
}

TEST(BalloonScore, EmptyAndOverLimitDeals) {
  EXPECT_EQ(score({}, example()).quality, 0.0);
  EXPECT_EQ(score({}, example()).f_harm, 0.0);
  const auto over = score({"Lamp", "Rope"}, example());
  EXPECT_EQ(over.quality, 0.0);
  EXPECT_EQ(over.f_a, 0.0);
}

TEST(BalloonScore, MatchesExhaustiveOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const auto inst = generate_instance(rng, 15, seed % 2 ? GoalMode::opposing : GoalMode::common);
    const auto k = inst.knapsack();
    const auto opt_a = oracle::exhaustive_knapsack(k, optimize::Side::A);
    const auto opt_b = oracle::exhaustive_knapsack(k, optimize::Side::B);
    // The subset attaining the best harmonic mean must score 100.
    double best = -1;
    std::uint64_t best_mask = 0;
    std::vector<std::uint64_t> feasible;
    for (const auto& sub : oracle::all_subsets(k)) {
      if (sub.weight > inst.limit) continue;
      feasible.push_back(sub.mask);
      const double h = optimize::harmonic_mean(100.0 * sub.a / opt_a, 100.0 * sub.b / opt_b);
      if (h > best) best = h, best_mask = sub.mask;
    }
    auto deal_of = [&](std::uint64_t mask) {
      ItemSet d;
      for (std::size_t i = 0; i < inst.items.size(); ++i)
        if (mask >> i & 1U) d.insert(inst.items[i].name);
      return d;
    };
    const auto top = score(deal_of(best_mask), inst);
    EXPECT_EQ(top.opt_a, opt_a);
    EXPECT_EQ(top.opt_b, opt_b);
    EXPECT_NEAR(top.opt_star, oracle::exhaustive_opt_star(k), 1e-9);
    EXPECT_NEAR(top.quality, 100.0, 1e-9);
    for (int j = 0; j < 10; ++j) {
      const auto s = score(deal_of(feasible[rng.uniform(0, static_cast<std::int64_t>(feasible.size()) - 1)]), inst);
      EXPECT_GE(s.quality, 0.0);
      EXPECT_LE(s.quality, 100.0 + 1e-9);
    }
  }
}

TEST(BalloonScore, CommonGoalOptimumIsFullQuality) {
  Rng rng(11);
  const auto inst = generate_instance(rng, 15, GoalMode::common);
  const auto sol = optimize::knapsack_opt(inst.knapsack(), optimize::Side::A);
  const auto s = score(ItemSet(sol.witness.begin(), sol.witness.end()), inst);
  EXPECT_NEAR(s.quality, 100.0, 1e-9);
}

TEST(BalloonGenerate, ModesNamesLimit) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const auto c = generate_instance(rng, 15, GoalMode::common);
    EXPECT_EQ(c.prefs_a, c.prefs_b);
    const auto o = generate_instance(rng, 35, GoalMode::opposing, {true, false});
    EXPECT_EQ(o.n_items(), 35);
    EXPECT_TRUE(o.strategic_reasoning);
    for (const auto& x : o.items) {
      EXPECT_TRUE(is_generated_name(x.name)) << x.name;
      EXPECT_GE(x.weight, 1);
      EXPECT_LE(x.weight, 10);
      for (const auto& y : o.items) {
        // Inverted ordering: every strict comparison flips.
        const bool a_less = o.prefs_a.at(x.name) < o.prefs_a.at(y.name);
        const bool b_more = o.prefs_b.at(x.name) > o.prefs_b.at(y.name);
        EXPECT_EQ(a_less, b_more);
      }
    }
    EXPECT_EQ(o.limit, std::llround(0.5 * static_cast<double>(o.total_weight())));
    EXPECT_LT(o.limit, o.total_weight());
  }
  Rng a(5), b(5);
  EXPECT_EQ(generate_instance(a, 15, GoalMode::opposing), generate_instance(b, 15, GoalMode::opposing));
  EXPECT_THROW(generate_instance(a, 20, GoalMode::common), InvalidInput);
  EXPECT_EQ(default_experiments().size(), 6u);
}

TEST(BalloonGenerate, JsonRoundTrip) {
  Rng rng(9);
  const auto inst = generate_instance(rng, 15, GoalMode::opposing, {true, true});
  EXPECT_EQ(json(inst).get<Instance>(), inst);
}

TEST(BalloonPrompt, PlaceholdersAndFlags) {
  auto inst = example();
  const auto off = initial_prompt(inst, Seat::B);
  EXPECT_NE(off.find("LIMIT = 7\n"), std::string::npos);
  EXPECT_NE(off.find("Item effort = {'Ball': 2, 'Book': 3, 'Magazine': 1, 'Rope': 4, 'Lamp': 5}"), std::string::npos);
  EXPECT_NE(off.find("Item importance values = {'Ball': 1, 'Book': 1, 'Magazine': 2, 'Rope': 4, 'Lamp': 5}"),
            std::string::npos);
  EXPECT_EQ(off.find('$'), std::string::npos);
  EXPECT_EQ(off.find("STRATEGIC REASONING"), std::string::npos);
  inst.strategic_reasoning = inst.require_argument = true;
  const auto on = initial_prompt(inst, Seat::A);
  EXPECT_NE(on.find("STRATEGIC REASONING: {'...'}\nDescribe your strategic reasoning"), std::string::npos);
  EXPECT_NE(on.find("You must include the ARGUMENT format at least once"), std::string::npos);
}

TEST(BalloonParse, Accepts) {
  const auto inst = example();
  const auto m = parsed("PROPOSAL: {'Ball', 'Rope'}", inst);
  ASSERT_EQ(m.parts.size(), 1u);
  EXPECT_EQ(m.parts[0].tag, Tag::proposal);
  EXPECT_EQ(m.parts[0].items, (ItemSet{"Ball", "Rope"}));
  const auto multi = parsed("ARGUMENT: {'I need the {rope}; PROPOSAL: is not here'}\nREFUSE: {}\nAGREE: {\"Ball\",}", inst);
  ASSERT_EQ(multi.parts.size(), 3u);
  EXPECT_TRUE(multi.parts[1].items.empty());
  EXPECT_EQ(multi.parts[2].items, ItemSet{"Ball"});
  EXPECT_EQ(multi.relay_text(),
            "ARGUMENT: {'I need the {rope}; PROPOSAL: is not here'}\nREFUSE: {}\nAGREE: {\"Ball\",}");
}

TEST(BalloonParse, StrategicReasoningIsHidden) {
  auto inst = example();
  inst.strategic_reasoning = true;
  const auto m = parsed("STRATEGIC REASONING: {'my values: Rope=2'}\nPROPOSAL: {'Rope'}", inst);
  EXPECT_EQ(m.hidden_text(), "{'my values: Rope=2'}");
  EXPECT_EQ(m.relay_text(), "PROPOSAL: {'Rope'}");
  EXPECT_EQ(m.relay_text().find("Rope=2"), std::string::npos);
}

TEST(BalloonParse, ViolationsAndPrompts) {
  auto plain = example();
  auto sr = example();
  sr.strategic_reasoning = true;
  auto arg = example();
  arg.require_argument = true;
  struct Case {
    const Instance* inst;
    std::string text, reason;
  };
  const std::vector<Case> cases = {
      {&plain, "I think we should keep A42", "untagged"},
      {&plain, "Sure. PROPOSAL: {'Ball'}", "untagged"},
      {&plain, "ARGUMENT: no braces", "untagged"},
      {&plain, "", "untagged"},
      {&plain, "STRATEGIC REASONING: {'a'}\nSTRATEGIC REASONING: {'b'}\nPROPOSAL: {'Ball'}", "untagged"},
      {&plain, "STRATEGIC REASONING: {'...'}", "only_sr"},
      {&plain, "PROPOSAL: Magazine, Ball, Book", "invalid_set"},
      {&plain, "AGREE: {Ball}", "invalid_set"},
      {&plain, "REFUSE: {'Ball' 'Rope'}", "invalid_set"},
      {&sr, "PROPOSAL: {'Ball'}", "missing_sr"},
      {&sr, "PROPOSAL: {'Ball'}\nSTRATEGIC REASONING: {'x'}", "missing_sr"},
      {&sr, "STRATEGIC REASONING: {'x'}", "only_sr"},
      {&arg, "PROPOSAL: {'Ball'}", "missing_argument"},
  };
  for (const auto& c : cases) EXPECT_EQ(reason_of(parse_reply(c.text, *c.inst)), c.reason) << c.text;

  const auto v = std::get<Violation>(parse_reply("PROPOSAL: A, B", plain));
  EXPECT_EQ(v.message,
            "You used a PROPOSAL tag, but did not provide a valid python set containing strings as arguments, e.g. "
            "{'A', 'B', 'C', ...}. Try again.");
  EXPECT_EQ(v.category, "parse");
  EXPECT_EQ(std::get<Violation>(parse_reply("hi", plain)).message,
            "Your response contained an untagged sequence or you used STRATEGIC REASONING more than once.\nYou may "
            "only use the structured formats as explained in the initial message.\nThey must all be of the form TAG: "
            "{...}.");
}

TEST(BalloonApply, ActiveLedgerAndGameErrors) {
  const auto inst = example();
  State s;
  s = step(s, "PROPOSAL: {'Rope', 'Ball', 'Magazine'}", inst, Seat::B);
  EXPECT_TRUE(s.is_active(Seat::B, {"Rope", "Ball", "Magazine"}));
  EXPECT_EQ(s.turns_without_progress, 0);

  auto check = [&](const State& st, const std::string& text, Seat who) {
    return reason_of(apply_message(st, parsed(text, inst), inst, who));
  };
  EXPECT_EQ(check(s, "PROPOSAL: {'Z99'}", Seat::A), "unknown_items");
  EXPECT_EQ(check(s, "PROPOSAL: {'Lamp', 'Rope'}", Seat::A), "over_limit");
  EXPECT_EQ(check(s, "REFUSE: {'Ball'}", Seat::A), "refuse_inactive");
  EXPECT_EQ(check(s, "REFUSE: {'Rope', 'Ball', 'Magazine'}", Seat::B), "refuse_inactive");  // own proposal
  EXPECT_EQ(check(s, "AGREE: {'Rope', 'Ball', 'Magazine'}", Seat::B), "agree_inactive");
  EXPECT_EQ(check(s, "AGREE: {'Rope', 'Ball', 'Magazine'}\nAGREE: {'Ball'}", Seat::A), "multiple_agree");
  EXPECT_EQ(std::get<Violation>(apply_message(s, parsed("PROPOSAL: {'Z99'}", inst), inst, Seat::A)).message,
            "Your proposal includes items which are not in the game. Try again.");

  // A failed check leaves no partial effect: the proposal before a bad REFUSE is not logged.
  EXPECT_EQ(check(s, "PROPOSAL: {'Book'}\nREFUSE: {'Ball'}", Seat::A), "refuse_inactive");

  const auto refused = step(s, "REFUSE: {'Rope', 'Ball', 'Magazine'}", inst, Seat::A);
  EXPECT_FALSE(refused.is_active(Seat::B, {"Rope", "Ball", "Magazine"}));
  EXPECT_EQ(refused.turns_without_progress, 1);
  EXPECT_EQ(check(refused, "AGREE: {'Rope', 'Ball', 'Magazine'}", Seat::A), "agree_inactive");

  const auto done = step(s, "AGREE: {'Magazine', 'Rope', 'Ball'}", inst, Seat::A);
  ASSERT_TRUE(done.deal.has_value());
  EXPECT_EQ(*done.deal, (ItemSet{"Rope", "Ball", "Magazine"}));
}

TEST(BalloonApply, ProgressCounter) {
  const auto inst = example();
  State s;
  s = step(s, "PROPOSAL: {'Ball'}", inst, Seat::A);
  for (int k = 1; k <= 7; ++k) {
    s = step(s, "PROPOSAL: {'Ball'}", inst, k % 2 ? Seat::B : Seat::A);
    EXPECT_EQ(s.turns_without_progress, k);
  }
  s = step(s, "PROPOSAL: {'Book'}", inst, Seat::B);
  EXPECT_EQ(s.turns_without_progress, 0);
  s = step(s, "ARGUMENT: {'no'}", inst, Seat::A);
  EXPECT_EQ(s.turns_without_progress, 1);
}

TEST(BalloonPlay, ExampleDialogueEndsInDeal) {
  EpisodeRecord rec;
  QueueAgent a({"PROPOSAL: {'Magazine', 'Ball', 'Book'}", "AGREE: {'Rope', 'Ball', 'Magazine'}"});
  QueueAgent b({"REFUSE: {'Magazine', 'Ball', 'Book'}\nPROPOSAL: {'Rope', 'Ball', 'Magazine'}"});
  Episode ep(rec, a, b);
  play(ep, example());
  ASSERT_EQ(rec.status, Status::played);
  EXPECT_EQ(rec.end_state, EndState::goal);
  EXPECT_NEAR(*rec.quality, 100.0, 1e-9);
  EXPECT_EQ(rec.details.at("deal"), json({"Ball", "Magazine", "Rope"}));
  EXPECT_EQ(rec.details.at("proposals").size(), 2u);
  // B's first turn: its rules, then A's relayed message.
  const auto& first_b = b.seen[0].back().content;
  EXPECT_EQ(first_b.substr(first_b.size() - 40), "\n\nPROPOSAL: {'Magazine', 'Ball', 'Book'}");
}

TEST(BalloonPlay, FreeTextAbortsAfterThreeAttempts) {
  EpisodeRecord rec;
  QueueAgent a({"Let's keep the rope."}), b({"unused"});
  Episode ep(rec, a, b);
  play(ep, example());
  EXPECT_EQ(rec.status, Status::aborted);
  EXPECT_EQ(*rec.abort_reason, "protocol_violation");
  EXPECT_EQ(a.seen.size(), 3u);
  EXPECT_TRUE(b.seen.empty());
}

TEST(BalloonPlay, RecoversAfterGameError) {
  EpisodeRecord rec;
  QueueAgent a({"AGREE: {'Ball'}", "PROPOSAL: {'Ball'}", "unused"}), b({"AGREE: {'Ball'}"});
  Episode ep(rec, a, b);
  play(ep, example());
  ASSERT_EQ(rec.status, Status::played);
  EXPECT_EQ(a.seen[1].back().content,
            "You agreed to a proposal which is not active.\nProposals are only active if they have been logged by "
            "the other player via PROPOSAL and have not been deactivated by you via REFUSE. Try again.");
}

TEST(BalloonPlay, StagnationAbort) {
  EpisodeRecord rec;
  QueueAgent a({"PROPOSAL: {'Ball'}"}), b({"ARGUMENT: {'no'}"});
  Episode ep(rec, a, b);
  play(ep, example());
  EXPECT_EQ(*rec.abort_reason, "no_progress");
  EXPECT_EQ(rec.details.at("turns"), 9);
}

TEST(BalloonPlay, StrategicReasoningNeverRelayed) {
  auto inst = example();
  inst.strategic_reasoning = true;
  EpisodeRecord rec;
  QueueAgent a({"STRATEGIC REASONING: {'secret Rope=2'}\nPROPOSAL: {'Rope'}", "STRATEGIC REASONING: {'x'}\nARGUMENT: {'y'}"});
  QueueAgent b({"STRATEGIC REASONING: {'hidden'}\nAGREE: {'Rope'}"});
  Episode ep(rec, a, b);
  play(ep, inst);
  ASSERT_EQ(rec.status, Status::played);
  EXPECT_EQ(b.seen[0].back().content.find("secret"), std::string::npos);
  for (const auto& e : rec.events)
    if (e.channel == Channel::a_to_b || e.channel == Channel::b_to_a) EXPECT_EQ(e.content.find("STRATEGIC"), std::string::npos);
}

TEST(BalloonPlay, TransportFailure) {
  EpisodeRecord rec;
  DeadAgent a;
  QueueAgent b({"x"});
  Episode ep(rec, a, b);
  play(ep, example());
  EXPECT_EQ(*rec.abort_reason, "transport_failure");
}
