#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "empa/agents/chat_client.hpp"
#include "empa/agents/judge_wire.hpp"
#include "empa/agents/llm_backends.hpp"
#include "empa/agents/scripted.hpp"
#include "empa/orchestrator.hpp"
#include "oracle.hpp"

namespace empa {
namespace {

using agents::ScriptedBackendSpec;
using agents::Role;

const std::filesystem::path kRoot = EMPA_SOURCE_DIR;

scenario::Scenario lin_card() {
  return scenario::load_scenario(kRoot / "data/fixtures/lin_xiaoyue.scenario.json");
}

// Lin card with a frozen all-level-3 baseline: P0 = (-21, -27, -27).
scenario::Scenario maxed() {
  auto s = lin_card();
  s.iedr = rubric::uniform_assessment(3);
  return s;
}

json levels_all(int prog, int neg) {
  return {{"C", {prog, neg}}, {"A", {prog, neg}}, {"P", {prog, neg}}};
}

struct Rig {
  std::unique_ptr<agents::UserBackend> user;
  std::unique_ptr<agents::TestBackend> test;
  std::unique_ptr<agents::JudgeBackend> judge;
  std::unique_ptr<agents::DirectorBackend> director;

  Rig(json judge_program, json director_program = json::object(), std::uint64_t seed = 1) {
    user = agents::scripted_user(
        {Role::kUser, {{"utterances", {"u1", "u2", "u3"}}, {"repeat", true}, {"echo_memories", true}}, seed});
    test = agents::scripted_test({Role::kTest, {{"replies", {"r1", "r2"}}, {"repeat", true}}, seed});
    judge = agents::scripted_judge({Role::kJudge, std::move(judge_program), seed});
    director = agents::scripted_director({Role::kDirector, std::move(director_program), seed});
  }
  Backends view() { return {*user, *test, *judge, *director}; }
};

EpisodeConfig cfg(int t_max = 30, int k = 1) {
  EpisodeConfig c;
  c.t_max = t_max;
  c.k = k;
  c.seed = 5;
  return c;
}

// ---------------------------------------------------------------------------
// Episodes

TEST(Episode, SteadyProgressSucceeds) {
  const auto s = maxed();
  Rig rig(json{{"rule", "constant"}, {"levels", levels_all(2, 0)}});
  const auto r = run_episode(s, rig.view(), cfg());
  ASSERT_TRUE(r.complete) << r.abort_reason;
  ASSERT_TRUE(r.termination.has_value());
  EXPECT_EQ(*r.termination, TerminationType::kSuccess);
  // First window: v = (3,3,3) against P0 = (-21,-27,-27).
  const double expected = oracle::projected_work({3, 3, 3}, {21, 27, 27});
  EXPECT_NEAR(expected, 225.0 / std::sqrt(1899.0), 1e-12);
  EXPECT_NEAR(r.windows.front().delta_e, expected, 1e-12);
  EXPECT_NEAR(r.windows.front().delta_e, 5.163, 5e-4);
  EXPECT_NEAR(r.r0, std::sqrt(1899.0), 1e-9);
  ASSERT_TRUE(r.metrics.has_value());
  EXPECT_EQ(r.metrics->status, TerminationType::kSuccess);
}

TEST(Episode, SustainedRegressionFails) {
  Rig rig(json{{"rule", "constant"}, {"levels", levels_all(0, -2)}});
  const auto r = run_episode(maxed(), rig.view(), cfg());
  ASSERT_TRUE(r.termination.has_value());
  EXPECT_EQ(*r.termination, TerminationType::kEpmFailure);
  EXPECT_GE(resistance(r.windows.back().state_after), 1.25 * r.r0);
}

TEST(Episode, IdleRunsToTurnBudget) {
  Rig rig(json{{"rule", "constant"}, {"levels", json::object()}});
  const auto r = run_episode(maxed(), rig.view(), cfg(12));
  EXPECT_EQ(*r.termination, TerminationType::kMaxTurns);
  EXPECT_EQ(r.windows.size(), 12u);
  EXPECT_EQ(r.history.size(), 12u);
}

TEST(Episode, DirectorStopAfterThirdWindow) {
  json director{{"actions",
                 {{{"action", "Continue"}}, {{"action", "Continue"}}, {{"action", "Terminate"}, {"reason", "done"}}}}};
  Rig rig(json{{"rule", "constant"}, {"levels", json::object()}}, director);
  const auto r = run_episode(maxed(), rig.view(), cfg());
  EXPECT_EQ(*r.termination, TerminationType::kDirectorStop);
  EXPECT_EQ(r.windows.size(), 3u);
  EXPECT_EQ(r.decisions.size(), 3u);
}

TEST(Episode, ReleasedMemoryReachesUser) {
  json director{{"actions", {{{"action", "ReleaseMemory"}, {"key", "epilogue"}}}}, {"then", "continue"}};
  Rig rig(json{{"rule", "constant"}, {"levels", json::object()}}, director);
  const auto s = maxed();
  const auto r = run_episode(s, rig.view(), cfg(4));
  ASSERT_GE(r.history.size(), 2u);
  EXPECT_EQ(r.history[0].user.find("[epilogue]"), std::string::npos);
  EXPECT_NE(r.history[1].user.find("[epilogue] " + s.persona.story.epilogue), std::string::npos);
  // Echoed once only.
  EXPECT_EQ(r.history[2].user.find("[epilogue]"), std::string::npos);
}

TEST(Episode, UnknownMemoryKeyAborts) {
  json director{{"actions", {{{"action", "ReleaseMemory"}, {"key", "stage9"}}}}};
  Rig rig(json{{"rule", "constant"}, {"levels", json::object()}}, director);
  const auto r = run_episode(maxed(), rig.view(), cfg());
  EXPECT_FALSE(r.complete);
  EXPECT_NE(r.abort_reason.find("stage9"), std::string::npos);
  EXPECT_FALSE(r.termination.has_value());
}

TEST(Episode, FrozenBaselineSkipsJudge) {
  Rig rig(json{{"rule", "constant"}, {"levels", json::object()}});
  run_episode(maxed(), rig.view(), cfg(3));
  EXPECT_EQ(dynamic_cast<agents::ScriptedJudge&>(*rig.judge).iedr_calls(), 0);

  Rig rig2(json{{"rule", "constant"}, {"levels", json::object()}});
  const auto r = run_episode(lin_card(), rig2.view(), cfg(3));
  EXPECT_EQ(dynamic_cast<agents::ScriptedJudge&>(*rig2.judge).iedr_calls(), 1);
  EXPECT_TRUE(r.iedr_from_judge);
  // Priority rule on the card: C Low, A Medium, P High.
  EXPECT_EQ(r.p0, (PsychState{-7, -18, -27}));
}

TEST(Episode, ZeroBaselineIsDegenerate) {
  auto s = maxed();
  s.iedr = rubric::uniform_assessment(0);
  Rig rig(json{{"rule", "constant"}, {"levels", json::object()}});
  try {
    run_episode(s, rig.view(), cfg());
    FAIL() << "expected DegenerateScenario";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateScenario);
  }
}

TEST(Episode, ExhaustedScriptPropagates) {
  Rig rig(json{{"windows", {levels_all(1, 0)}}});
  try {
    run_episode(maxed(), rig.view(), cfg(5));
    FAIL() << "expected ProgramExhausted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProgramExhausted);
  }
}

TEST(Episode, WindowLengthK) {
  Rig rig(json{{"rule", "constant"}, {"levels", levels_all(1, 0)}});
  const auto r = run_episode(maxed(), rig.view(), cfg(7, 3));
  ASSERT_FALSE(r.windows.empty());
  EXPECT_EQ(r.windows[0].first_turn, 1);
  EXPECT_EQ(r.windows[0].last_turn, 3);
  if (r.windows.size() == 3) {
    // Final partial window flushed at the turn budget.
    EXPECT_EQ(r.windows[2].first_turn, 7);
    EXPECT_EQ(r.windows[2].last_turn, 7);
  }
}

// ---------------------------------------------------------------------------
// Env facade

TEST(Env, MatchesBatchDriver) {
  const auto s = maxed();
  json judge{{"rule", "random"}};
  Rig a(judge, json::object(), 9);
  const auto direct = run_episode(s, a.view(), cfg(10));

  Rig b(judge, json::object(), 9);
  Env env;
  auto pkt = env.reset(s, b.view(), cfg(10));
  EXPECT_FALSE(pkt.done);
  EXPECT_EQ(pkt.info.at("user_message"), "u1");
  const std::vector<std::string> replies = {"r1", "r2"};
  std::size_t i = 0;
  double total = 0.0;
  while (!env.done()) {
    pkt = env.step(replies[i++ % 2]);
    total += pkt.reward.delta_e;
  }
  const auto& r = env.result();
  ASSERT_EQ(r.windows.size(), direct.windows.size());
  EXPECT_EQ(r.windows, direct.windows);
  EXPECT_EQ(r.termination, direct.termination);
  EXPECT_NEAR(total, direct.metrics->e_total, 1e-9);
  EXPECT_TRUE(pkt.done);
}

TEST(Env, StepAfterDone) {
  Rig rig(json{{"rule", "constant"}, {"levels", json::object()}});
  Env env;
  env.reset(maxed(), rig.view(), cfg(1));
  auto pkt = env.step("hi");
  EXPECT_TRUE(pkt.done);
  try {
    env.step("again");
    FAIL() << "expected SteppedAfterDone";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSteppedAfterDone);
  }
}

TEST(Env, RewardOnlyWhenWindowCloses) {
  Rig rig(json{{"rule", "constant"}, {"levels", levels_all(1, 0)}});
  Env env;
  env.reset(maxed(), rig.view(), cfg(6, 2));
  auto p1 = env.step("a");
  EXPECT_FALSE(p1.reward.window_closed);
  EXPECT_EQ(p1.reward.delta_e, 0.0);
  auto p2 = env.step("b");
  EXPECT_TRUE(p2.reward.window_closed);
  EXPECT_GT(p2.reward.delta_e, 0.0);
}

TEST(Batch, DeterministicAcrossParallelism) {
  std::vector<scenario::Scenario> list;
  for (int i = 1; i <= 6; ++i) {
    auto s = maxed();
    s.id = "case-" + std::to_string(i);
    list.push_back(s);
  }
  BackendFactory factory = [](const scenario::Scenario&, std::uint64_t seed) {
    OwnedBackends o;
    o.user = agents::scripted_user({Role::kUser, {{"utterances", {"hi"}}, {"repeat", true}}, seed});
    o.test = agents::scripted_test({Role::kTest, {{"replies", {"ok"}}, {"repeat", true}}, seed});
    o.judge = agents::scripted_judge({Role::kJudge, {{"rule", "random"}}, seed});
    o.director = agents::scripted_director({Role::kDirector, json::object(), seed});
    return o;
  };
  auto c = cfg(15);
  c.parallelism = 1;
  const auto serial = run_batch(list, factory, c);
  c.parallelism = 3;
  const auto parallel = run_batch(list, factory, c);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].scenario_id, list[i].id);
    EXPECT_EQ(serial[i].windows, parallel[i].windows);
  }
  // Different scenario ids draw different judge streams.
  EXPECT_NE(serial[0].windows, serial[1].windows);
}

// ---------------------------------------------------------------------------
// Judge wire format

TEST(Wire, RoundTripMdep) {
  const auto w = rubric::make_window(4, {{{1, 0}, {2, -1}, {0, -2}}}, "quoted");
  const auto text = agents::serialize_mdep_output(w);
  EXPECT_EQ(agents::parse_mdep_output(text, 4), w);
}

TEST(Wire, RoundTripIedr) {
  const auto a = rubric::uniform_assessment(2);
  EXPECT_EQ(agents::parse_iedr_output(agents::serialize_iedr_output(a)), a);
}

TEST(Wire, FencedBlockWinsOverProse) {
  const auto w = rubric::make_window(1, {{{1, 0}, {0, 0}, {0, 0}}}, "q");
  const std::string text = "Reasoning {not json} here.\n" + agents::serialize_mdep_output(w);
  EXPECT_EQ(agents::parse_mdep_output(text, 1), w);
}

TEST(Wire, WrongWindowRejected) {
  const auto w = rubric::make_window(2, {{{1, 0}, {0, 0}, {0, 0}}}, "q");
  try {
    agents::parse_mdep_output(agents::serialize_mdep_output(w), 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedJudgeOutput);
  }
}

TEST(Wire, GarbageRejected) {
  for (const std::string bad : {"", "no json", "{\"schema\": \"other\"}", "{\"channels\": 3"}) {
    try {
      agents::parse_mdep_output(bad, 1);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kMalformedJudgeOutput) << bad;
    }
  }
}

TEST(Wire, RepairLoopRecovers) {
  const auto good = agents::serialize_mdep_output(rubric::make_window(1, {{{1, 0}, {0, 0}, {0, 0}}}, "q"));
  int calls = 0;
  agents::ChatFn chat = [&](const std::vector<agents::ChatMessage>& m) {
    ++calls;
    if (calls == 1) return std::string("sorry, no json");
    EXPECT_EQ(m.back().role, "user");
    return good;
  };
  auto r = agents::ask_with_repair(chat, {{"user", "rate"}},
                                   [](std::string_view t) { return agents::parse_mdep_output(t, 1); });
  EXPECT_EQ(r.repairs, 1);
  EXPECT_EQ(calls, 2);
}

TEST(Wire, RepairBudgetExhausted) {
  int calls = 0;
  agents::ChatFn chat = [&](const std::vector<agents::ChatMessage>&) {
    ++calls;
    return std::string("nope");
  };
  try {
    agents::ask_with_repair(chat, {{"user", "rate"}},
                            [](std::string_view t) { return agents::parse_mdep_output(t, 1); }, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedJudgeOutput);
  }
  EXPECT_EQ(calls, 3);
}

TEST(Wire, DirectorOutput) {
  auto d = agents::parse_director_output(
      "```json\n{\"guidance\": \"slow down\", \"action\": {\"action\": \"AdjustPacing\", \"pacing\": \"slower\"}}\n```");
  EXPECT_EQ(d.guidance, "slow down");
  EXPECT_EQ(d.action.kind, agents::DirectorAction::Kind::kAdjustPacing);
  try {
    agents::parse_director_output("{\"action\": {\"action\": \"Dance\"}}");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidDirectorAction);
  }
}

// ---------------------------------------------------------------------------
// Chat client against a loopback server

class Loopback {
 public:
  explicit Loopback(std::function<void(const httplib::Request&, httplib::Response&)> h) {
    server_.Post("/v1/chat/completions", [h](const httplib::Request& q, httplib::Response& r) { h(q, r); });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~Loopback() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

std::string completion(const std::string& text) {
  return json{{"choices", {{{"message", {{"role", "assistant"}, {"content", text}}}}}}}.dump();
}

agents::ChatEndpointConfig endpoint(const std::string& url, const std::string& model) {
  agents::ChatEndpointConfig c;
  c.base_url = url;
  c.model_name = model;
  c.auth_env_var = "EMPA_TEST_KEY";
  c.backoff_initial_s = 0.001;
  c.timeout_s = 2.0;
  c.max_retries = 3;
  return c;
}

TEST(ChatClient, RetriesThroughRateLimits) {
  ::setenv("EMPA_TEST_KEY", "secret", 1);
  std::atomic<int> hits{0};
  std::string auth;
  Loopback server([&](const httplib::Request& q, httplib::Response& r) {
    auth = q.get_header_value("Authorization");
    if (hits++ < 2) {
      r.status = 429;
      return;
    }
    r.set_content(completion("hello"), "application/json");
  });
  agents::ChatClient client(endpoint(server.url(), "m-retry"));
  EXPECT_EQ(client.complete({{"user", "hi"}}), "hello");
  EXPECT_EQ(hits.load(), 3);
  EXPECT_EQ(client.last_retries(), 2);
  EXPECT_EQ(auth, "Bearer secret");
}

TEST(ChatClient, GivesUpAfterBudget) {
  ::setenv("EMPA_TEST_KEY", "secret", 1);
  std::atomic<int> hits{0};
  Loopback server([&](const httplib::Request&, httplib::Response& r) {
    ++hits;
    r.status = 503;
  });
  auto c = endpoint(server.url(), "m-fail");
  c.max_retries = 1;
  agents::ChatClient client(c);
  try {
    client.complete({{"user", "hi"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBackendFailure);
  }
  EXPECT_EQ(hits.load(), 2);
}

TEST(ChatClient, MissingKeyBeforeNetwork) {
  ::unsetenv("EMPA_TEST_KEY");
  std::atomic<int> hits{0};
  Loopback server([&](const httplib::Request&, httplib::Response& r) {
    ++hits;
    r.set_content(completion("x"), "application/json");
  });
  agents::ChatClient client(endpoint(server.url(), "m-auth"));
  try {
    client.complete({{"user", "hi"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAuthMissing);
  }
  EXPECT_EQ(hits.load(), 0);
}

TEST(ChatClient, MalformedBody) {
  ::setenv("EMPA_TEST_KEY", "secret", 1);
  Loopback server([&](const httplib::Request&, httplib::Response& r) {
    r.set_content("{\"choices\": []}", "application/json");
  });
  agents::ChatClient client(endpoint(server.url(), "m-bad"));
  try {
    client.complete({{"user", "hi"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedResponse);
  }
}

TEST(ChatClient, ConfigRejectsInlineKey) {
  try {
    json{{"base_url", "http://x"}, {"model_name", "m"}, {"api_key", "k"}}.get<agents::ChatEndpointConfig>();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigError);
  }
}

TEST(ChatClient, LlmJudgeOverLoopback) {
  ::setenv("EMPA_TEST_KEY", "secret", 1);
  const auto rating = rubric::make_window(1, {{{2, 0}, {1, 0}, {0, -1}}}, "quote");
  std::atomic<int> hits{0};
  Loopback server([&](const httplib::Request&, httplib::Response& r) {
    // First answer is unusable so the repair path runs.
    const std::string text = hits++ == 0 ? "I think it went well." : agents::serialize_mdep_output(rating);
    r.set_content(completion(text), "application/json");
  });
  agents::ChatClient client(endpoint(server.url(), "m-judge"));
  const auto prompts = agents::load_prompts(kRoot / "assets/prompts");
  agents::LlmJudge judge("judge", client.as_fn(), prompts.judge_iedr, prompts.judge_mdep);
  const auto s = maxed();
  agents::History h{{"hello", "hi there"}};
  agents::JudgeContext ctx{s, {}, h, 1};
  EXPECT_EQ(judge.adjudicate(ctx), rating);
  EXPECT_EQ(judge.last_repairs(), 1);
}

TEST(ChatClient, RateLimiterSpacesCalls) {
  agents::RateLimiter limiter(1200.0);  // one call per 50 ms
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 4; ++i) limiter.acquire();
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
  EXPECT_GE(ms, 140);
}

}  // namespace
}  // namespace empa
