#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "support/fixtures.hpp"

using namespace tnr;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

EpisodeReport run(const std::string& id, RunConfig cfg = {}) {
  auto sc = fixtures::corpus(id);
  auto p = playbook_policy(sc);
  return run_episode(sc, *p, cfg);
}

}  // namespace

TEST(Machine, TransitionsAreTotal) {
  const std::vector<Phase> all{Phase::Init,     Phase::Detect,   Phase::Rollback, Phase::Bootstrap,
                               Phase::Mitigate, Phase::Validate, Phase::Reflect,  Phase::Terminate};
  for (auto p : all)
    for (int bits = 0; bits < 64; ++bits) {
      MachineInputs in{bool(bits & 1), bool(bits & 2), bool(bits & 4), bool(bits & 8), (bits & 16) ? 9 : 0, 9,
                       bool(bits & 32)};
      auto t = machine_step(p, in);
      EXPECT_EQ(t.termination != Termination::None, t.next == Phase::Terminate && p != Phase::Terminate)
          << to_string(p) << " " << bits;
    }
}

TEST(Machine, PhaseOrder) {
  MachineInputs in;
  in.retry_limit = 9;
  EXPECT_EQ(machine_step(Phase::Init, in).next, Phase::Detect);
  EXPECT_EQ(machine_step(Phase::Detect, in).next, Phase::Rollback);
  EXPECT_EQ(machine_step(Phase::Rollback, in).next, Phase::Bootstrap);
  EXPECT_EQ(machine_step(Phase::Bootstrap, in).next, Phase::Mitigate);
  EXPECT_EQ(machine_step(Phase::Mitigate, in).next, Phase::Validate);
  EXPECT_EQ(machine_step(Phase::Validate, in).next, Phase::Reflect);
  EXPECT_EQ(machine_step(Phase::Reflect, in).next, Phase::Rollback);
  in.rollback_leftovers = false;
  EXPECT_EQ(machine_step(Phase::Reflect, in).next, Phase::Bootstrap);
  in.retries_used = 9;
  EXPECT_EQ(machine_step(Phase::Reflect, in).termination, Termination::RetryExhausted);
  in.healthy = true;
  EXPECT_EQ(machine_step(Phase::Detect, in).termination, Termination::DetectedHealthy);
  in.validation_success = true;
  in.step_limit_hit = true;
  EXPECT_EQ(machine_step(Phase::Validate, in).termination, Termination::Success);
  in.validation_success = false;
  EXPECT_EQ(machine_step(Phase::Validate, in).termination, Termination::StepLimit);
  in.policy_exhausted = true;
  EXPECT_EQ(machine_step(Phase::Mitigate, in).termination, Termination::PolicyExhausted);
}

TEST(Ablation, ModeEffects) {
  RunConfig c;
  auto full = ablation_mode_effects(c);
  EXPECT_EQ(full.retry_limit, 9);
  EXPECT_TRUE(full.rollback_leftovers && full.undo_on_abort && full.enforce_tnr);
  c.ablation = Ablation::NoRetry;
  EXPECT_EQ(ablation_mode_effects(c).retry_limit, 0);
  c.ablation = Ablation::NaiveRetryNoUndo;
  auto naive = ablation_mode_effects(c);
  EXPECT_FALSE(naive.rollback_leftovers || naive.undo_on_abort || naive.enforce_tnr);
  EXPECT_EQ(ablation_from("naive"), Ablation::NaiveRetryNoUndo);
  EXPECT_FALSE(ablation_from("bogus"));
}

TEST(Episode, FirstTryFix) {
  auto rep = run("target-port-misconfig-1");
  EXPECT_TRUE(rep.solved);
  EXPECT_EQ(rep.termination, Termination::Success);
  EXPECT_EQ(rep.retries, 0);
  EXPECT_EQ(rep.visible.back(), Severity(0));
  EXPECT_EQ(rep.phases, (std::vector<Phase>{Phase::Init, Phase::Detect, Phase::Rollback, Phase::Bootstrap,
                                            Phase::Mitigate, Phase::Validate, Phase::Terminate}));
  EXPECT_EQ(rep.rounds.front().rollback_messages, (std::vector<std::string>{"No more actions to rollback."}));
}

TEST(Episode, RetryRollsBackThePreviousRound) {
  auto rep = run("missing-storage-class");
  EXPECT_TRUE(rep.solved);
  EXPECT_GE(rep.retries, 1);
  ASSERT_GE(rep.rounds.size(), 2u);
  const auto& msgs = rep.rounds[1].rollback_messages;
  ASSERT_GE(msgs.size(), 2u);
  EXPECT_EQ(msgs.front().rfind("Rolled back the previous command: ", 0), 0u);
  EXPECT_EQ(msgs.back(), "No more actions to rollback.");
  ASSERT_TRUE(rep.rounds[0].reflection);
  EXPECT_FALSE(rep.rounds[0].reflection->issues.empty());
  for (const auto& v : rep.visible) EXPECT_LE(v, rep.baseline);
}

TEST(Episode, NoopScenarioDetectsHealthy) {
  auto rep = run("noop-detection-1");
  EXPECT_EQ(rep.termination, Termination::DetectedHealthy);
  EXPECT_TRUE(rep.solved);
  EXPECT_EQ(rep.steps, 0);
  EXPECT_TRUE(rep.rounds.empty());
}

TEST(Episode, CrashingPlanIsContained) {
  auto rep = run("scale-to-zero");
  EXPECT_TRUE(rep.solved);
  bool crashed_txn = false;
  for (const auto& r : rep.rounds)
    for (const auto& t : r.transactions) crashed_txn = crashed_txn || t.reason == AbortReason::Crash;
  EXPECT_TRUE(crashed_txn);
  for (const auto& v : rep.visible) EXPECT_FALSE(v.is_infinite());
}

TEST(Episode, StepLimitStopsTheEpisode) {
  RunConfig cfg;
  cfg.step_limit = 3;
  auto rep = run("wrong-image-2", cfg);
  EXPECT_EQ(rep.termination, Termination::StepLimit);
  EXPECT_LE(rep.steps, 3);
  EXPECT_FALSE(rep.solved);
}

TEST(Episode, LongPlansAreChunkedByK) {
  RunConfig cfg;
  cfg.K = 2;
  auto rep = run("missing-storage-classes", cfg);
  EXPECT_LE(rep.max_txn_actions, 2);
  EXPECT_TRUE(rep.solved);
  for (const auto& r : rep.rounds)
    for (const auto& t : r.transactions) EXPECT_EQ(t.hidden_path.size(), t.commands.size() + 1);
}

TEST(Episode, NaiveModeCanRegressVisibly) {
  RunConfig cfg;
  cfg.ablation = Ablation::NaiveRetryNoUndo;
  auto rep = run("poisoned-storage-class", cfg);
  EXPECT_FALSE(rep.solved);
  EXPECT_TRUE(rep.regression_visible);
  cfg.ablation = Ablation::Full;
  auto full = run("poisoned-storage-class", cfg);
  EXPECT_TRUE(full.solved);
  EXPECT_FALSE(full.regression_visible);
}

TEST(Episode, AuditAndReportJson) {
  auto sc = fixtures::corpus("wrong-image");
  auto p = playbook_policy(sc);
  AuditLog log;
  auto rep = run_episode(sc, *p, RunConfig{}, &log);
  auto j = to_json(rep);
  EXPECT_EQ(j["scenario"], "wrong-image");
  EXPECT_EQ(j["solved"], rep.solved);
  EXPECT_EQ(log.records().front()["event"], "init");
  EXPECT_EQ(log.records().back()["event"], "terminate");
  for (std::size_t i = 0; i < log.records().size(); ++i) EXPECT_EQ(log.records()[i]["seq"], i);
}

TEST(Episode, RejectsBadConfig) {
  RunConfig cfg;
  cfg.K = 0;
  EXPECT_THROW(run("wrong-image", cfg), std::invalid_argument);
}

TEST(Scenario, CorpusFilesAreCanonical) {
  std::vector<std::string> files = scenario_files(fixtures::source_path("scenarios"));
  for (const auto& f : scenario_files(fixtures::source_path("scenarios/extra"))) files.push_back(f);
  ASSERT_GE(files.size(), 13u);
  for (const auto& f : files) {
    auto text = read_file(f);
    EXPECT_EQ(serialize_scenario(parse_scenario(text)), text) << f;
  }
}

TEST(Scenario, UnknownFieldIsASchemaError) {
  auto j = fixtures::shop_json();
  j["deployments"][0]["replica"] = 3;
  try {
    scenario_from_json(j);
    FAIL() << "accepted an unknown field";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.field, "deployments[0].replica");
  }
  auto k = fixtures::shop_json();
  k["services"][0]["selector"] = "ghost";
  EXPECT_THROW(scenario_from_json(k), SchemaError);
  EXPECT_THROW(parse_scenario("{ not json"), SchemaError);
}

TEST(Scenario, LoadedInitialStateIsReconciled) {
  auto sc = fixtures::corpus("wrong-image");
  EXPECT_TRUE(deep_equal(reconcile(sc.initial), sc.initial));
  EXPECT_FALSE(sc.is_noop());
  EXPECT_TRUE(fixtures::corpus("noop-detection-1").is_noop());
}

TEST(Suite, AggregatesFromRows) {
  auto rep = run_suite(load_corpus(fixtures::source_path("scenarios")), RunConfig{});
  ASSERT_TRUE(rep.success_rate);
  EXPECT_EQ(rep.solved(), static_cast<int>(rep.episodes.size()));
  int hist = 0;
  for (const auto& [k, v] : rep.retry_histogram) hist += v;
  EXPECT_EQ(hist, static_cast<int>(rep.episodes.size()));
  EXPECT_FALSE(aggregate({}).success_rate.has_value());
  EXPECT_TRUE(to_json(aggregate({}))["success_rate"].is_null());
}

TEST(Suite, AblationOrdering) {
  auto corpus = load_corpus(fixtures::source_path("scenarios"));
  RunConfig cfg;
  auto full = run_suite(corpus, cfg).solved();
  cfg.ablation = Ablation::NoRetry;
  auto noretry = run_suite(corpus, cfg).solved();
  cfg.ablation = Ablation::NaiveRetryNoUndo;
  auto naive = run_suite(corpus, cfg).solved();
  EXPECT_GT(full, noretry);
  EXPECT_GT(full, naive);
}

TEST(Sweep, MonotoneAndCsv) {
  auto rows = sweep_step_limit(load_corpus(fixtures::source_path("scenarios")), {1, 5, 20}, RunConfig{});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_LE(rows[0].solved, rows[1].solved);
  EXPECT_LE(rows[1].solved, rows[2].solved);
  auto csv = sweep_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "limit,solved,total,success_rate");
  EXPECT_THROW(sweep_step_limit({}, {5, 3}, RunConfig{}), std::invalid_argument);
}
