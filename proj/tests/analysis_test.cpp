#include <gtest/gtest.h>

#include <fstream>

#include "negobench/analysis.hpp"
#include "negobench/runner.hpp"
#include "oracles.hpp"

using namespace negobench;
using namespace negobench::analysis;
using L = Label;

namespace {

Timeline tl(std::vector<std::pair<int, balloon::ItemSet>> entries) {
  Timeline t;
  for (auto& [who, set] : entries) t.push_back({who, set});
  return t;
}

// Oracle: ratio from explicit simple-cycle enumeration per segment.
double oracle_ratio(const std::vector<Label>& labels) {
  int on = 0, total = 0;
  for (const auto& seg : segments(labels)) {
    std::set<std::pair<int, int>> edges;
    for (std::size_t i = 1; i < seg.size(); ++i) edges.emplace(static_cast<int>(seg[i - 1]), static_cast<int>(seg[i]));
    const auto marked = oracle::edges_on_simple_cycles(edges);
    for (std::size_t i = 1; i < seg.size(); ++i) {
      ++total;
      on += marked.count({static_cast<int>(seg[i - 1]), static_cast<int>(seg[i])}) > 0;
    }
  }
  return total ? static_cast<double>(on) / total : 0.0;
}

}  // namespace

TEST(Proposals, Stubbornness) {
  const auto t = tl({{1, {"A", "B"}}, {1, {"A", "B"}}, {1, {"A", "C"}}, {1, {"A", "B"}}});
  const auto s = stubbornness(t);
  EXPECT_DOUBLE_EQ(s[0].rate, 0.5);
  EXPECT_EQ(s[0].repeats, 2);
  EXPECT_EQ(s[1].rate, 0.0);
  EXPECT_EQ(stubbornness(tl({{1, {"A"}}, {2, {"A"}}}))[0].rate, 0.0);  // repeats are per player
  EXPECT_EQ(stubbornness({})[0].rate, 0.0);
}

TEST(Proposals, AlternationRate) {
  EXPECT_EQ(*alternation_rate(std::vector<int>{1, 2, 1}), 1.0);
  EXPECT_EQ(*alternation_rate(std::vector<int>{1, 1, 2}), 0.5);
  EXPECT_EQ(*alternation_rate(std::vector<int>{2, 2, 2}), 0.0);
  EXPECT_FALSE(alternation_rate(std::vector<int>{2}).has_value());
  EXPECT_FALSE(alternation_rate(std::vector<int>{}).has_value());
}

TEST(Proposals, SubstitutionSeries) {
  const auto c = substitution_series(tl({{1, {"A", "B"}}, {2, {"A", "C"}}, {1, {"A", "C"}}, {2, {}}, {1, {"A"}}}));
  ASSERT_EQ(c.size(), 4u);
  EXPECT_EQ(*c[0], 1.0);
  EXPECT_EQ(*c[1], 0.0);
  EXPECT_EQ(*c[2], 1.0);
  EXPECT_FALSE(c[3].has_value());
  EXPECT_EQ(*substitution_series(tl({{1, {"A"}}, {2, {"A", "B", "C"}}}))[0], 2.0);
}

TEST(Proposals, ParetoAdherenceAgainstExhaustiveFront) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    Rng rng(seed);
    const auto inst = balloon::generate_instance(rng, 15, seed % 2 ? balloon::GoalMode::opposing : balloon::GoalMode::common);
    const auto k = inst.knapsack();
    const auto front = optimize::payoff_front(k);
    const auto exact = oracle::exhaustive_front(k);
    Timeline t;
    int expected_on = 0;
    for (int j = 0; j < 40; ++j) {
      balloon::ItemSet s;
      for (const auto& it : inst.items)
        if (rng.uniform(0, 3) == 0) s.insert(it.name);
      t.push_back({j % 2 + 1, s});
      const bool feasible = inst.weight_of(s) <= inst.limit;
      expected_on += feasible && exact.count({inst.value_of(s, Seat::A), inst.value_of(s, Seat::B)});
    }
    EXPECT_DOUBLE_EQ(pareto_adherence(t, front, inst), expected_on / 40.0);
  }
}

TEST(Proposals, ParetoAdherenceSmallCases) {
  balloon::Instance inst;
  inst.items = {{"A", 1}, {"B", 1}, {"C", 5}};
  inst.limit = 2;
  inst.prefs_a = {{"A", 3}, {"B", 1}, {"C", 9}};
  inst.prefs_b = inst.prefs_a;
  const auto front = optimize::payoff_front(inst.knapsack());
  EXPECT_EQ(pareto_adherence(tl({{1, {"A", "B"}}}), front, inst), 1.0);
  EXPECT_EQ(pareto_adherence(tl({{1, {"A", "B"}}, {2, {"A"}}}), front, inst), 0.5);
  EXPECT_EQ(pareto_adherence(tl({{1, {"C"}}}), front, inst), 0.0);  // over the limit
  EXPECT_EQ(pareto_adherence({}, front, inst), 0.0);
}

TEST(Penalties, Breakdown) {
  auto b = penalty_breakdown(3, 1);
  EXPECT_EQ(*b.format_ratio, 0.75);
  EXPECT_EQ(*b.move_ratio, 0.25);
  EXPECT_FALSE(penalty_breakdown(0, 0).format_ratio.has_value());
  b = penalty_breakdown(0, 4);
  EXPECT_EQ(*b.format_ratio, 0.0);
  EXPECT_EQ(*b.move_ratio, 1.0);
}

TEST(Trace, LabelsAndConflictRules) {
  EXPECT_EQ(label_sentence("but maybe we should"), L::PROPOSE);
  EXPECT_EQ(label_sentence("so we must finish"), L::ASSERT);
  EXPECT_EQ(label_sentence("but however"), L::UNDERMINE);
  EXPECT_EQ(label_sentence("Thus, done."), L::CONCLUDE);
  EXPECT_EQ(label_sentence("But we need it"), L::SKIPPED);
  EXPECT_EQ(label_sentence("Alternatively take another"), L::ALTERNATIVE);
  EXPECT_EQ(label_sentence("He needs the rope"), L::ASSERT);
  EXPECT_EQ(label_sentence("Waiting for the rope"), L::UNDERMINE);
  EXPECT_EQ(label_sentence("We cannot decide"), std::nullopt);  // whole tokens only
  EXPECT_EQ(label_sentence("Perhaps."), L::PROPOSE);
  EXPECT_EQ(label_sentence("no cue here"), std::nullopt);
  EXPECT_EQ(label_trace("Maybe take A. Wait, no. We must take B. Fine"),
            (std::vector<Label>{L::PROPOSE, L::UNDERMINE, L::ASSERT}));
}

TEST(Trace, SegmentsAndCycleRatio) {
  EXPECT_DOUBLE_EQ(cycle_edge_ratio({L::PROPOSE, L::UNDERMINE, L::PROPOSE, L::ASSERT}), 2.0 / 3.0);
  EXPECT_EQ(segments({L::PROPOSE, L::UNDERMINE, L::PROPOSE, L::ASSERT}).size(), 1u);
  EXPECT_EQ(cycle_edge_ratio({L::PROPOSE, L::CONCLUDE}), 0.0);
  EXPECT_EQ(segments({L::ASSERT, L::ASSERT}).size(), 2u);
  EXPECT_EQ(cycle_edge_ratio({L::ASSERT, L::ASSERT}), 0.0);
  EXPECT_EQ(cycle_edge_ratio({L::PROPOSE, L::PROPOSE}), 1.0);  // self-loop
  EXPECT_EQ(cycle_edge_ratio({L::PROPOSE}), 0.0);
  EXPECT_EQ(segments({L::PROPOSE, L::SKIPPED, L::CONCLUDE, L::UNDERMINE}),
            (std::vector<std::vector<Label>>{{L::PROPOSE, L::CONCLUDE}, {L::UNDERMINE}}));
}

TEST(Trace, CycleRatioMatchesEnumerationOracle) {
  Rng rng(17);
  for (int k = 0; k < 500; ++k) {
    std::vector<Label> labels;
    const auto n = rng.uniform(0, 14);
    for (int i = 0; i < n; ++i) labels.push_back(static_cast<Label>(rng.uniform(0, 5)));
    const double r = cycle_edge_ratio(labels);
    EXPECT_DOUBLE_EQ(r, oracle_ratio(labels));
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 1.0);
    // Segments concatenate to the labels minus SKIPPED.
    std::vector<Label> flat, kept;
    for (const auto& s : segments(labels)) flat.insert(flat.end(), s.begin(), s.end());
    for (Label l : labels)
      if (l != L::SKIPPED) kept.push_back(l);
    EXPECT_EQ(flat, kept);
  }
}

TEST(Trace, LoopDetection) {
  EXPECT_TRUE(detect_loops("Take the rope. Take the rope! take the ROPE."));
  EXPECT_FALSE(detect_loops("Take the rope. Take the rope. Then stop."));
  EXPECT_FALSE(detect_loops("One. Two. Three. Four."));
  const std::string phrase = "we could take the rope and the ball now ";
  EXPECT_TRUE(detect_loops(phrase + "hmm " + phrase + "ok " + phrase));
}

TEST(Language, ClassifyAndConsistency) {
  const LanguageId id;
  EXPECT_EQ(id.classify("I think that we should keep the rope and the ball."), Lang::en);
  EXPECT_EQ(id.classify("Ich denke, dass wir das Seil und die Lampe behalten sollten."), Lang::de);
  EXPECT_EQ(id.classify("Penso che la corda sia più utile della lampada per noi."), Lang::it);
  EXPECT_EQ(id.classify("PROPOSAL: {'A42'}"), Lang::other);
  const auto c = language_consistency({"We should keep the rope.", "It is the best for us."},
                                      {"The rope is what I want."}, Locale::de);
  EXPECT_EQ(*c.completion, 0.0);
  EXPECT_EQ(*c.reasoning, 0.0);
  const auto en = language_consistency({"We should keep the rope."}, {}, Locale::en);
  EXPECT_EQ(*en.completion, 1.0);
  EXPECT_FALSE(en.reasoning.has_value());
}

TEST(Language, DataFilesMatchBuiltins) {
  const auto from_files = LanguageId::from_dir(NEGOBENCH_DATA_DIR "/stopwords");
  const LanguageId builtin;
  for (Lang l : {Lang::en, Lang::de, Lang::it}) EXPECT_EQ(from_files.list(l), builtin.list(l));
}

TEST(Metrics, EpisodeRowsPerGame) {
  const auto balloon_suite = generate_suite(Game::balloon, 2);
  const auto rec = run_episode(balloon_suite[0], scripted_config("balloon_greedy"), scripted_config("balloon_greedy"));
  const auto row = episode_metrics(rec);
  EXPECT_EQ(row.at("game"), "balloon");
  EXPECT_EQ(row.at("pareto_adherence"), 1.0);
  EXPECT_EQ(row.at("stubbornness_a"), 0.0);
  EXPECT_TRUE(row.at("segments_a").is_null());

  const auto cleanup_suite = generate_suite(Game::cleanup, 2);
  const auto crow = episode_metrics(
      run_episode(cleanup_suite[0], scripted_config("cleanup_row_aligner"), scripted_config("cleanup_row_aligner")));
  EXPECT_EQ(crow.at("penalties"), 0);
  EXPECT_TRUE(crow.at("format_ratio").is_null());
  EXPECT_EQ(crow.at("ps"), 1.0);
}
