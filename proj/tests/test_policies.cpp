#include <gtest/gtest.h>

#include <map>
#include <random>

#include "support/fixtures.hpp"

using namespace tnr;
using fixtures::shop;

namespace {

// Reference ranking: count first-error edges, order by count then first sighting.
std::vector<Suspect> brute_force_rank(const std::vector<Trace>& traces) {
  std::map<std::pair<std::string, std::string>, std::pair<int, int>> seen;  // edge -> (count, first index)
  int order = 0;
  for (const auto& t : traces)
    for (const auto& s : t.spans)
      if (s.error) {
        auto [it, fresh] = seen.try_emplace({s.service, s.operation}, 0, order);
        if (fresh) ++order;
        ++it->second.first;
        break;
      }
  std::vector<std::tuple<int, int, Suspect>> rows;
  for (const auto& [edge, v] : seen) rows.push_back({-v.first, v.second, Suspect{edge.first, edge.second, v.first}});
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });
  std::vector<Suspect> out;
  for (auto& r : rows) out.push_back(std::get<2>(r));
  return out;
}

Playbook two_step_book() {
  return playbook_from_json(nlohmann::json::parse(R"({
    "id": "book",
    "entries": [
      {"evidence": {"alert_contains": "CrashLoopBackOff"},
       "attempts": [{"intent": "first", "commands": ["kubectl get pods"]},
                    {"intent": "second", "commands": ["kubectl describe pods"]}]},
      {"evidence": {}, "attempts": [{"intent": "fallback", "commands": ["kubectl get pods"]}]}
    ]})"));
}

}  // namespace

TEST(Bootstrap, MatchesBruteForceOnRandomTraces) {
  std::mt19937_64 rng(99);
  const std::vector<std::string> services{"a", "b", "c", "d", "e"};
  auto pick = [&] { return services[rng() % services.size()]; };
  for (int round = 0; round < 300; ++round) {
    std::vector<Trace> traces;
    for (int i = 0, n = static_cast<int>(rng() % 40); i < n; ++i) {
      Trace t{"r" + std::to_string(i), "x", {}};
      for (int h = 0, len = 1 + static_cast<int>(rng() % 4); h < len; ++h)
        t.spans.push_back({pick(), pick(), rng() % 4 == 0});
      traces.push_back(t);
    }
    EXPECT_EQ(bootstrap_localize(traces), brute_force_rank(traces)) << "round " << round;
  }
}

TEST(Bootstrap, EmptyWhenNothingFails) {
  EXPECT_TRUE(bootstrap_localize(run_workload(shop().initial, 50, 1).traces).empty());
  auto ranked = bootstrap_localize(run_workload(shop({{{"kind", "ScaleToZero"}, {"target", "api"}}}).faulted(), 50, 1).traces);
  ASSERT_EQ(ranked.size(), 1u);
  EXPECT_EQ(ranked[0].service, "web");
  EXPECT_EQ(ranked[0].operation, "api");
}

TEST(Observation, IsPureAndDeterministic) {
  const auto s = shop({{{"kind", "WrongImage"}, {"target", "web"}}}).faulted();
  const auto copy = s;
  auto a = observe(s, 100, 7, 1, std::nullopt);
  auto b = observe(s, 100, 7, 1, std::nullopt);
  EXPECT_EQ(to_json(a), to_json(b));
  EXPECT_EQ(s.pods, copy.pods);
  EXPECT_TRUE(deep_equal(s, copy));
  EXPECT_FALSE(a.alerts.empty());
  EXPECT_FALSE(a.logs["web"].empty());
  for (const auto& l : a.logs["web"]) EXPECT_TRUE(is_error_line(l)) << l;
  EXPECT_EQ(default_detect(a), Detection::Anomalous);
  EXPECT_EQ(default_detect(observe(shop().initial, 100, 7, 1, std::nullopt)), Detection::Healthy);
}

TEST(Observation, ReflectionSurvivesJson) {
  auto note = reflect({"Container web is in Error"}, {"restart", {"kubectl rollout restart deployment web"}, ""}, 1);
  auto back = reflection_from_json(to_json(note));
  EXPECT_EQ(back.issues, note.issues);
  EXPECT_EQ(back.prior_plan, note.prior_plan);
  EXPECT_EQ(back.hypothesis, note.hypothesis);
}

TEST(Reflect, AccumulatesHistoryAndNeedsIssues) {
  MitigationPlan p1{"one", {"kubectl get pods"}, ""}, p2{"two", {"kubectl describe pods"}, ""};
  auto n1 = reflect({"x"}, p1, 1);
  auto n2 = reflect({"y"}, p2, 2, n1);
  EXPECT_EQ(n2.plan_history, (std::vector<std::string>{"one [kubectl get pods]", "two [kubectl describe pods]"}));
  EXPECT_EQ(n2.issues, (std::vector<std::string>{"y"}));
  EXPECT_THROW(reflect({}, p1, 1), std::invalid_argument);
}

TEST(Playbook, FirstMatchIsStickyUntilForget) {
  PlaybookPolicy p(two_step_book());
  auto crash = observe(shop({{{"kind", "WrongImage"}, {"target", "web"}}}).faulted(), 50, 1, 1, std::nullopt);
  auto pending = observe(shop({{{"kind", "ScaleToZero"}, {"target", "web"}}}).faulted(), 50, 1, 1, std::nullopt);
  EXPECT_EQ(p.propose(crash)->intent, "first");
  EXPECT_EQ(p.propose(pending)->intent, "first");
  crash.attempt = 2;
  EXPECT_EQ(p.propose(crash)->intent, "second");
  crash.attempt = 3;
  auto none = p.propose(crash);
  ASSERT_FALSE(none);
  EXPECT_EQ(none.error().code, PolicyErrorCode::PlaybookExhausted);
  p.forget();
  EXPECT_EQ(p.propose(pending)->intent, "fallback");
}

TEST(Playbook, StrictSchema) {
  auto bad = nlohmann::json::parse(R"({"id": "b", "entries": [{"evidence": {"colour": "red"}, "attempts": []}]})");
  try {
    playbook_from_json(bad);
    FAIL() << "accepted an unknown field";
  } catch (const PlaybookError& e) {
    EXPECT_NE(e.field.find("colour"), std::string::npos);
  }
  EXPECT_THROW(playbook_from_json(nlohmann::json::parse(R"({"entries": []})")), PlaybookError);
  auto ok = two_step_book();
  EXPECT_EQ(to_json(playbook_from_json(to_json(ok))), to_json(ok));
}

TEST(Playbook, CorpusBooksLoad) {
  for (const auto& f : scenario_files(fixtures::source_path("scenarios"))) {
    auto sc = load_scenario(f);
    EXPECT_NO_THROW(playbook_policy(sc)) << f;
  }
}

TEST(Plan, ParsingIsStrict) {
  EXPECT_TRUE(plan_from_json(nlohmann::json::parse(R"({"intent":"x","commands":["kubectl get pods"]})")));
  EXPECT_FALSE(plan_from_json(nlohmann::json::parse(R"({"commands":["a"],"extra":1})")));
  EXPECT_FALSE(plan_from_json(nlohmann::json::parse(R"({"intent":"x"})")));
  EXPECT_FALSE(plan_from_json(nlohmann::json::parse(R"({"commands":[1]})")));
  auto bad = validate_plan({"x", {"kubectl get pods | wc -l"}, ""});
  ASSERT_FALSE(bad);
  EXPECT_EQ(bad.error().message, "Pipe operator detected: |. Only a single command is allowed.");
}

TEST(RandomPolicy, ReproducibleAndAlwaysLintClean) {
  auto obs = observe(fixtures::corpus("wrong-image").faulted(), 50, 7, 1, std::nullopt);
  RandomPolicy a(42, 20), b(42, 20), c(43, 20);
  for (int i = 0; i < 50; ++i) {
    auto pa = a.propose(obs);
    auto pb = b.propose(obs);
    ASSERT_TRUE(pa && pb);
    EXPECT_EQ(pa->commands, pb->commands);
    EXPECT_LE(pa->commands.size(), 20u);
    EXPECT_TRUE(validate_plan(*pa)) << summarize(*pa);
  }
  EXPECT_NE(a.propose(obs)->commands, c.propose(obs)->commands);
}

TEST(Frames, EncodeDecodeIncrementally) {
  std::string wire = encode_frame("{\"a\":1}") + encode_frame("") + encode_frame("héllo");
  FrameDecoder d;
  std::vector<std::string> got;
  for (char ch : wire) {
    d.feed(std::string_view(&ch, 1));
    while (auto f = d.next()) got.push_back(*f);
  }
  EXPECT_EQ(got, (std::vector<std::string>{"{\"a\":1}", "", "héllo"}));
  EXPECT_TRUE(d.idle());

  FrameDecoder bad;
  bad.feed("12x\n{}");
  EXPECT_THROW(bad.next(), std::runtime_error);
  FrameDecoder huge;
  huge.feed("99999999999\n");
  EXPECT_THROW(huge.next(), std::runtime_error);
}

class External : public testing::Test {
 protected:
  static ExternalPolicy make(const std::string& mode, int timeout_ms = 3000) {
    return ExternalPolicy({FAKE_POLICY_PATH, mode}, timeout_ms);
  }
  ObservationBundle obs() {
    return observe(fixtures::corpus("target-port-misconfig-1").faulted(), 117, 7, 1, std::nullopt);
  }
};

TEST_F(External, GoodPolicyAnswersAndSolves) {
  auto p = make("good");
  auto plan = p.propose(obs());
  ASSERT_TRUE(plan) << plan.error().message;
  ASSERT_EQ(plan->commands.size(), 1u);
  EXPECT_NE(plan->commands[0].find("patch service user"), std::string::npos);

  auto ext = make("good");
  auto rep = run_episode(fixtures::corpus("target-port-misconfig-1"), ext, RunConfig{});
  EXPECT_TRUE(rep.solved);
  EXPECT_EQ(rep.termination, Termination::Success);
}

TEST_F(External, LintViolationIsMalformed) {
  auto p = make("lint");
  auto r = p.propose(obs());
  ASSERT_FALSE(r);
  EXPECT_EQ(r.error().code, PolicyErrorCode::MalformedPlan);
  EXPECT_EQ(r.error().message, "Interactive flag detected: -it. Such commands are not supported.");
}

TEST_F(External, SilenceTimesOut) {
  auto p = make("silent", 200);
  auto t0 = std::chrono::steady_clock::now();
  auto r = p.propose(obs());
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
  ASSERT_FALSE(r);
  EXPECT_EQ(r.error().code, PolicyErrorCode::ProtocolTimeout);
  EXPECT_GE(ms, 150);
  EXPECT_LT(ms, 5000);
}

TEST_F(External, GarbageAndBrokenFramesAreMalformed) {
  auto g = make("garbage");
  EXPECT_EQ(g.propose(obs()).error().code, PolicyErrorCode::MalformedPlan);
  auto b = make("badframe");
  EXPECT_EQ(b.propose(obs()).error().code, PolicyErrorCode::MalformedPlan);
}

TEST_F(External, EarlyExitIsATimeout) {
  auto p = make("exit");
  EXPECT_EQ(p.propose(obs()).error().code, PolicyErrorCode::ProtocolTimeout);
  ExternalPolicy missing({"/nonexistent/policy"}, 500);
  EXPECT_EQ(missing.propose(obs()).error().code, PolicyErrorCode::ProtocolTimeout);
}

TEST_F(External, SilentPolicyEpisodeTerminates) {
  auto p = make("silent", 100);
  RunConfig cfg;
  cfg.retry_limit = 1;
  auto rep = run_episode(fixtures::corpus("target-port-misconfig-1"), p, cfg);
  EXPECT_FALSE(rep.solved);
  EXPECT_EQ(rep.termination, Termination::RetryExhausted);
  EXPECT_EQ(rep.rounds.front().policy_error->code, PolicyErrorCode::ProtocolTimeout);
}
