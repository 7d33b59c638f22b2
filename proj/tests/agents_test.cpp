#include <gtest/gtest.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <thread>

#include "negobench/runner.hpp"

using namespace negobench;

namespace {

AgentConfig script(const std::string& id) { return scripted_config(id); }

// Minimal chat-completions backend on a loopback port.
class StubBackend {
 public:
  explicit StubBackend(std::string response, int status = 200) : response_(std::move(response)), status_(status) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      last_request = json::parse(req.body);
      auth = req.get_header_value("Authorization");
      res.status = status_;
      res.set_content(response_, "application/json");
    });
    port = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubBackend() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }

  int port = 0;
  json last_request;
  std::string auth;

 private:
  httplib::Server server_;
  std::string response_;
  int status_;
  std::thread thread_;
};

std::string completion(const std::string& text, const std::string& reasoning = "") {
  json msg = {{"role", "assistant"}, {"content", text}};
  if (!reasoning.empty()) msg["reasoning_content"] = reasoning;
  return json{{"choices", {{{"message", msg}}}},
              {"usage", {{"prompt_tokens", 12}, {"completion_tokens", 3},
                         {"completion_tokens_details", {{"reasoning_tokens", 2}}}}}}
      .dump();
}

}  // namespace

TEST(Suites, DefaultCountsAndRoundTrip) {
  EXPECT_EQ(generate_suite(Game::dond, 1).size(), 40u);
  EXPECT_EQ(generate_suite(Game::cleanup, 1).size(), 27u);
  const auto balloon = generate_suite(Game::balloon, 1);
  EXPECT_EQ(balloon.size(), 36u);
  std::map<std::string, int> per_exp;
  for (const auto& e : balloon) ++per_exp[e.experiment];
  EXPECT_EQ(per_exp.size(), 6u);
  for (const auto& [exp, n] : per_exp) EXPECT_EQ(n, 6) << exp;

  const auto cleanup = generate_suite(Game::cleanup, 3);
  std::map<std::string, int> levels;
  for (const auto& e : cleanup) ++levels[e.experiment];
  EXPECT_EQ(levels, (std::map<std::string, int>{{"easy", 9}, {"medium", 9}, {"hard", 9}}));

  const std::string path = ::testing::TempDir() + "/suite.jsonl";
  write_suite(path, cleanup);
  const auto back = read_suite(path);
  ASSERT_EQ(back.size(), cleanup.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(json(back[i]), json(cleanup[i]));
    EXPECT_EQ(std::get<cleanup::Instance>(back[i].instance), std::get<cleanup::Instance>(cleanup[i].instance));
  }
  std::remove(path.c_str());
  EXPECT_EQ(json(generate_suite(Game::dond, 9)), json(generate_suite(Game::dond, 9)));
}

TEST(Scripted, FactoryRejectsUnknownAndMismatched) {
  const auto suite = generate_suite(Game::dond, 1);
  EXPECT_THROW(make_scripted("chess_bot", suite[0].instance, Seat::A), InvalidInput);
  EXPECT_THROW(make_scripted("balloon_greedy", suite[0].instance, Seat::A), InvalidInput);
  EXPECT_THROW(scripted_config("nope"), InvalidInput);
  EXPECT_EQ(make_scripted("dond_premature", suite[0].instance, Seat::B)->name(), "dond_premature");
}

TEST(Scripted, DondTruthfulPairMatchesAllocationScan) {
  for (const auto& e : generate_suite(Game::dond, 4)) {
    const auto rec = run_episode(e, script("dond_truthful_coop"), script("dond_truthful_coop"));
    ASSERT_EQ(rec.status, Status::played) << e.instance_id;
    EXPECT_DOUBLE_EQ(*rec.quality, 100.0) << e.instance_id;
    const auto& inst = std::get<dond::Instance>(e.instance);
    const auto scan = dond::scan(inst);
    const auto p = rec.details.at("payoffs");
    EXPECT_EQ(p[0].get<std::int64_t>() + p[1].get<std::int64_t>(), scan.max_total);
    EXPECT_EQ(rec.details.at("messages"), json({1, 1}));
  }
}

TEST(Scripted, DondPrematureProposesAtOnce) {
  const auto e = generate_suite(Game::dond, 4)[0];
  const auto rec = run_episode(e, script("dond_premature"), script("dond_premature"));
  ASSERT_EQ(rec.status, Status::played);
  EXPECT_EQ(rec.details.at("messages"), json({0, 0}));
}

TEST(Scripted, CleanupAlignerReachesZeroDistance) {
  for (const auto& e : generate_suite(Game::cleanup, 8)) {
    const auto rec = run_episode(e, script("cleanup_row_aligner"), script("cleanup_row_aligner"));
    ASSERT_EQ(rec.status, Status::played) << e.instance_id;
    EXPECT_EQ(rec.end_state, EndState::goal) << e.instance_id;
    EXPECT_EQ(rec.details.at("penalties"), 0);
    EXPECT_EQ(rec.details.at("final_sum"), 0.0);
    EXPECT_DOUBLE_EQ(*rec.quality, 100.0);
  }
}

TEST(Scripted, BalloonGreedyCommonGoalAgreesQuickly) {
  for (const auto& e : generate_suite(Game::balloon, 5)) {
    const auto& inst = std::get<balloon::Instance>(e.instance);
    const auto rec = run_episode(e, script("balloon_greedy"), script("balloon_greedy"));
    if (inst.goal_mode != balloon::GoalMode::common) {
      EXPECT_TRUE(rec.status == Status::played || rec.abort_reason == "no_progress") << e.instance_id;
      continue;
    }
    ASSERT_EQ(rec.status, Status::played) << e.instance_id;
    EXPECT_NEAR(*rec.quality, 100.0, 1e-9);
    EXPECT_LE(rec.details.at("proposals").size(), 2u);
  }
}

TEST(Scripted, RerunsAreByteIdentical) {
  for (Game g : {Game::dond, Game::cleanup, Game::balloon}) {
    const auto suite = generate_suite(g, 21);
    const std::string id = g == Game::dond ? "dond_truthful_coop" : g == Game::cleanup ? "cleanup_row_aligner" : "balloon_greedy";
    const auto first = run_suite(suite, script(id), script(id), 1);
    const auto second = run_suite(suite, script(id), script(id), 3);
    ASSERT_EQ(first.size(), second.size());
    for (std::size_t i = 0; i < first.size(); ++i) EXPECT_EQ(serialize(first[i]), serialize(second[i]));
  }
}

TEST(Remote, LoopbackRoundTrip) {
  StubBackend backend(completion("SAY: hi", "thinking"));
  RemoteConfig cfg;
  cfg.endpoint = backend.url();
  cfg.model_id = "stub-model";
  cfg.reasoning_enabled = true;
  cfg.sampling = {{"temperature", 0}};
  cfg.prices = {0.5, 1.0, 2.0};
  RemoteAgent agent(cfg);
  const auto reply = agent.act({{"user", "hello"}});
  EXPECT_EQ(reply.text, "SAY: hi");
  EXPECT_EQ(reply.reasoning, "thinking");
  EXPECT_EQ(reply.usage.prompt_tokens, 12);
  EXPECT_EQ(reply.usage.completion_tokens, 3);
  EXPECT_EQ(reply.usage.reasoning_tokens, 2);
  EXPECT_DOUBLE_EQ(reply.usage.cost_estimate, 12 * 0.5 + 3 * 1.0 + 2 * 2.0);
  EXPECT_EQ(backend.last_request.at("model"), "stub-model");
  EXPECT_EQ(backend.last_request.at("messages"), json::parse(R"([{"role":"user","content":"hello"}])"));
  EXPECT_EQ(backend.last_request.at("reasoning").at("enabled"), true);
  EXPECT_EQ(backend.last_request.at("temperature"), 0);
}

TEST(Remote, ApiKeyFromEnvironment) {
  StubBackend backend(completion("ok"));
  ::setenv("NEGOBENCH_TEST_KEY", "sk-test", 1);
  RemoteConfig cfg;
  cfg.endpoint = backend.url() + "/v1";
  cfg.model_id = "m";
  cfg.api_key_env = "NEGOBENCH_TEST_KEY";
  RemoteAgent(cfg).act({{"user", "x"}});
  EXPECT_EQ(backend.auth, "Bearer sk-test");
  cfg.api_key_env = "NEGOBENCH_TEST_KEY_MISSING";
  EXPECT_THROW(RemoteAgent{cfg}, InvalidInput);
}

TEST(Remote, FailuresBecomeTransportErrors) {
  RemoteConfig cfg;
  cfg.model_id = "m";
  cfg.timeout_s = 2;
  {
    StubBackend bad("{\"choices\": []}");
    cfg.endpoint = bad.url();
    EXPECT_THROW(RemoteAgent(cfg).act({{"user", "x"}}), TransportError);
  }
  {
    StubBackend down(completion("x"), 503);
    cfg.endpoint = down.url();
    EXPECT_THROW(RemoteAgent(cfg).act({{"user", "x"}}), TransportError);
  }
  int closed_port = 0;
  {
    StubBackend gone(completion("x"));
    closed_port = gone.port;
  }
  cfg.endpoint = "http://127.0.0.1:" + std::to_string(closed_port);
  EXPECT_THROW(RemoteAgent(cfg).act({{"user", "x"}}), TransportError);
}

TEST(Remote, EpisodeAgainstStubAndUnreachable) {
  // A backend that always says "SAY: hi" drives a full Clean Up episode to the round limit.
  StubBackend backend(completion("SAY: hi"));
  AgentConfig remote;
  remote.kind = AgentKind::remote;
  remote.endpoint = backend.url();
  remote.model_id = "stub";
  const auto e = generate_suite(Game::cleanup, 2)[0];
  const auto rec = run_episode(e, remote, remote);
  ASSERT_EQ(rec.status, Status::played);
  EXPECT_EQ(rec.end_state, EndState::limit);
  EXPECT_GT(rec.players[0].usage.prompt_tokens, 0);

  remote.endpoint = "http://127.0.0.1:1";
  remote.timeout_s = 2;
  const auto dead = run_episode(e, remote, remote);
  EXPECT_EQ(dead.status, Status::aborted);
  EXPECT_EQ(*dead.abort_reason, "transport_failure");
}

TEST(Manifest, ParseValidateAndFilter) {
  const std::string path = ::testing::TempDir() + "/manifest.json";
  {
    std::ofstream out(path);
    out << R"({"run_id": "r1", "game": "balloon", "experiments": ["15_common"], "seed": 3,
               "agents": [{"kind": "scripted", "script_id": "balloon_greedy"},
                          {"kind": "scripted", "script_id": "balloon_greedy"}],
               "transcripts": "out.jsonl"})";
  }
  const auto m = read_manifest(path);
  EXPECT_EQ(m.game, Game::balloon);
  const auto suite = manifest_suite(m);
  EXPECT_EQ(suite.size(), 6u);
  EXPECT_EQ(json(m).get<RunManifest>().run_id, "r1");
  {
    std::ofstream out(path);
    out << R"({"run_id": "r1", "game": "balloon", "agents": [{"kind": "remote"}, {"kind": "scripted", "script_id": "x"}], "transcripts": "o"})";
  }
  EXPECT_THROW(read_manifest(path), InvalidInput);
  std::remove(path.c_str());
}
