#include <gtest/gtest.h>

#include <filesystem>

#include "negobench/report.hpp"
#include "negobench/runner.hpp"

using namespace negobench;
using namespace negobench::report;
namespace fs = std::filesystem;

namespace {

std::vector<EpisodeRecord> scripted_run(Game g, std::uint64_t seed) {
  const std::string id = g == Game::dond ? "dond_truthful_coop" : g == Game::cleanup ? "cleanup_row_aligner" : "balloon_greedy";
  return run_suite(generate_suite(g, seed), scripted_config(id), scripted_config(id), 4);
}

std::size_t col(const Table& t, const std::string& name) {
  const auto it = std::find(t.columns.begin(), t.columns.end(), name);
  EXPECT_NE(it, t.columns.end()) << name;
  return static_cast<std::size_t>(it - t.columns.begin());
}

std::string fresh_dir(const std::string& name) {
  const auto dir = ::testing::TempDir() + "/" + name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Csv, RandomTablesRoundTrip) {
  Rng rng(5);
  const std::vector<std::string> awkward = {"", "plain", "a,b", "say \"hi\"", "two\nlines", "123", "true", "null", " pad ", "ü|x"};
  for (int k = 0; k < 200; ++k) {
    Table t;
    const auto width = rng.uniform(1, 6);
    for (int c = 0; c < width; ++c) t.columns.push_back(awkward[static_cast<std::size_t>(rng.uniform(0, 9))] + std::to_string(c));
    const auto height = rng.uniform(0, 8);
    for (int r = 0; r < height; ++r) {
      std::vector<json> row;
      for (int c = 0; c < width; ++c) {
        switch (rng.uniform(0, 4)) {
          case 0: row.emplace_back(nullptr); break;
          case 1: row.emplace_back(rng.uniform(-1000000, 1000000)); break;
          case 2: row.emplace_back(static_cast<double>(rng.uniform(-1000000, 1000000)) / static_cast<double>(rng.uniform(1, 997))); break;
          case 3: row.emplace_back(rng.uniform(0, 1) == 1); break;
          default: row.emplace_back(awkward[static_cast<std::size_t>(rng.uniform(0, 9))]); break;
        }
      }
      t.rows.push_back(std::move(row));
    }
    const auto back = parse_csv(to_csv(t));
    ASSERT_EQ(back, t) << to_csv(t);
    for (std::size_t r = 0; r < t.rows.size(); ++r)
      for (std::size_t c = 0; c < t.columns.size(); ++c) {
        const auto &a = back.rows[r][c], &b = t.rows[r][c];
        EXPECT_EQ(a.is_number_float(), b.is_number_float());
        EXPECT_EQ(a.is_number_integer(), b.is_number_integer());
        EXPECT_EQ(a.is_string(), b.is_string());
      }
  }
}

TEST(Csv, RejectsMalformed) {
  EXPECT_THROW(parse_csv(""), InvalidInput);
  EXPECT_THROW(parse_csv("\"a\",\"b\"\n1\n"), InvalidInput);
  EXPECT_THROW(parse_csv("\"a\"\n\"open\n"), InvalidInput);
  EXPECT_THROW(parse_csv("\"a\"\nhello\n"), InvalidInput);
  Table bad{{"a"}, {{json::array({1})}}};
  EXPECT_THROW(to_csv(bad), InvalidInput);
}

TEST(Csv, EpisodeTablesRoundTripThroughFiles) {
  const auto dir = fresh_dir("csv_files");
  for (Game g : {Game::dond, Game::cleanup, Game::balloon}) {
    const auto t = episode_table(scripted_run(g, 3));
    const auto path = dir + "/t.csv";
    write_text(path, to_csv(t));
    EXPECT_EQ(read_csv(path), t);
  }
}

TEST(Markdown, Layout) {
  Table t{{"name", "q", "n"}, {{"a|b", 12.345, 3}, {nullptr, nullptr, true}}};
  EXPECT_EQ(to_markdown(t), "| name | q | n |\n|---|---|---|\n| a\\|b | 12.35 | 3 |\n| - | - | true |\n");
}

TEST(Summary, DondOptimalSuite) {
  const auto t = summary_table(scripted_run(Game::dond, 2));
  ASSERT_EQ(t.rows.size(), 3u);  // cooperative, semi_competitive, all
  const auto& all = t.rows.back();
  EXPECT_EQ(all[col(t, "experiment")], "all");
  EXPECT_EQ(all[col(t, "episodes")], 40);
  EXPECT_EQ(all[col(t, "clemscore")], 100.0);
  EXPECT_EQ(all[col(t, "percent_agreement")], 100.0);
  EXPECT_EQ(all[col(t, "percent_optimal")], 100.0);
  EXPECT_EQ(all[col(t, "avg_messages")], 2.0);
  EXPECT_EQ(all[col(t, "tokens")], 0.0);
}

TEST(Summary, CleanupZeroPenalties) {
  const auto records = scripted_run(Game::cleanup, 2);
  const auto e = episode_table(records);
  ASSERT_EQ(e.rows.size(), 27u);
  for (const auto& row : e.rows) EXPECT_EQ(row[col(e, "ps")], 1.0);
  const auto s = summary_table(records);
  EXPECT_EQ(s.rows.size(), 4u);
  EXPECT_EQ(s.rows.back()[col(s, "ps")], 1.0);
  EXPECT_TRUE(s.rows.back()[col(s, "format_ratio")].is_null());
}

TEST(Summary, BalloonColumnsAndScoreMatchAggregate) {
  const auto records = scripted_run(Game::balloon, 2);
  const auto reports = build_reports(records);
  ASSERT_EQ(reports.size(), 1u);
  const auto& s = reports[0].summary;
  EXPECT_EQ(s.rows.size(), 7u);
  const auto agg = aggregate(records);
  EXPECT_EQ(s.rows.back()[col(s, "clemscore")], agg.clemscore);
  EXPECT_EQ(reports[0].score.at("clemscore"), agg.clemscore);
  for (const auto& row : s.rows) EXPECT_TRUE(row[col(s, "pareto_adherence")].is_number());
  const auto e = reports[0].episodes;
  EXPECT_TRUE(e.rows[0][col(e, "substitutions")].is_string());
}

TEST(Reports, DirectoryLoadingAndDeterminism) {
  const auto dir = fresh_dir("transcripts");
  EXPECT_THROW(load_transcript_dir(dir), InvalidInput);
  EXPECT_THROW(load_transcript_dir(dir + "/missing"), InvalidInput);
  write_transcripts(dir + "/dond.jsonl", scripted_run(Game::dond, 1));
  write_transcripts(dir + "/cleanup.jsonl", scripted_run(Game::cleanup, 1));
  write_text(dir + "/broken.jsonl", "{not json\n");
  write_text(dir + "/notes.txt", "ignored");
  const auto loaded = load_transcript_dir(dir);
  EXPECT_EQ(loaded.records.size(), 67u);
  ASSERT_EQ(loaded.warnings.size(), 1u);
  EXPECT_NE(loaded.warnings[0].find("broken.jsonl"), std::string::npos);

  const auto out1 = fresh_dir("report1"), out2 = fresh_dir("report2");
  const auto files = write_reports(out1, build_reports(loaded.records));
  write_reports(out2, build_reports(load_transcript_dir(dir).records));
  EXPECT_EQ(files.size(), 8u);
  for (const auto& f : files) {
    const auto name = fs::path(f).filename().string();
    EXPECT_EQ(read_text(f), read_text(out2 + "/" + name)) << name;
  }
  EXPECT_EQ(read_csv(out1 + "/cleanup_summary.csv"), build_reports(loaded.records)[1].summary);  // dond, cleanup
}
