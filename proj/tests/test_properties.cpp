// Randomized invariants. Seeds are fixed so failures reproduce.

#include <gtest/gtest.h>

#include "support/fixtures.hpp"
#include "support/gen.hpp"

using namespace tnr;
using testgen::Gen;

namespace {

// Walks a random scenario through a few random writes, yielding each state.
template <typename F>
void random_walks(std::uint64_t seed, int walks, int length, F&& visit) {
  Gen g(seed);
  for (int w = 0; w < walks; ++w) {
    auto s = g.scenario("walk-" + std::to_string(w)).faulted();
    for (int i = 0; i < length && !s.crashed; ++i) {
      auto c = parse(g.command(s));
      ASSERT_TRUE(c);
      visit(s, *c);
      if (classify(*c) == CommandClass::Write)
        if (auto r = apply_write(s, *c); r && !r->state.crashed) s = r->state;
    }
  }
}

}  // namespace

TEST(Property, ReconcileIsIdempotent) {
  random_walks(1, 60, 12, [](const ClusterState& s, const Command&) {
    auto once = reconcile(s);
    EXPECT_TRUE(deep_equal(once, s));
    EXPECT_EQ(reconcile(once).pods, once.pods);
  });
}

TEST(Property, SeverityIsAPureFunctionOfState) {
  random_walks(2, 40, 8, [](const ClusterState& s, const Command&) {
    EXPECT_EQ(measure(s, fixtures::probe()), measure(s, fixtures::probe()));
    EXPECT_GE(measure(s, fixtures::probe()), Severity(0));
  });
}

TEST(Property, DryRunIsPureAndAgreesWithApply) {
  random_walks(3, 60, 10, [](const ClusterState& s, const Command& c) {
    if (classify(c) != CommandClass::Write) return;
    const auto before = s;
    auto pred = dry_run(s, c);
    EXPECT_EQ(s.pods, before.pods);
    EXPECT_TRUE(deep_equal(s, before));
    EXPECT_EQ(pred.ok, apply_write(s, c).has_value()) << c.text << ": " << pred.message;
  });
}

TEST(Property, EveryLintedWriteHasAnInverse) {
  random_walks(4, 60, 10, [](const ClusterState& s, const Command& c) {
    if (classify(c) != CommandClass::Write) return;
    ASSERT_TRUE(lint(c, Role::Writer).allowed) << c.text;
    EXPECT_TRUE(synthesize_inverse(s, c)) << c.text;
  });
}

// Replaying the inverse restores the pre-state, except where the write
// recreated a killed pod: the kill marker lives outside any manifest and only
// the saved fragment brings it back.
TEST(Property, InverseRoundTrip) {
  int checked = 0, fragment_only = 0;
  random_walks(5, 120, 10, [&](const ClusterState& s, const Command& c) {
    if (classify(c) != CommandClass::Write) return;
    auto inv = synthesize_inverse(s, c);
    auto r = apply_write(s, c);
    if (!inv || !r) return;
    ++checked;
    ClusterState back = r->state;
    if (!inv->noop) {
      auto b = apply_write(back, *inv->command, r->state.crashed ? WriteMode::Recover : WriteMode::Normal);
      ASSERT_TRUE(b) << c.text << " -> " << inv->text() << ": " << b.error().message;
      back = b->state;
    } else if (back.crashed) {
      back.crashed = false;
      back = reconcile(back);
    }
    if (deep_equal(back, s)) return;
    bool had_kills = std::any_of(s.pods.begin(), s.pods.end(), [](const Pod& p) { return p.killed; });
    EXPECT_TRUE(had_kills) << c.text << " -> " << inv->text();
    ++fragment_only;
    EXPECT_TRUE(deep_equal(restore_fragment(back, capture_fragment(s, c)), s)) << c.text;
  });
  EXPECT_GT(checked, 300);
  EXPECT_LT(fragment_only * 10, checked);
}

TEST(Property, UndoStackAlwaysRestores) {
  random_walks(6, 80, 10, [](const ClusterState& s, const Command& c) {
    if (classify(c) != CommandClass::Write) return;
    auto inv = synthesize_inverse(s, c);
    auto r = apply_write(s, c);
    if (!inv || !r) return;
    UndoStack st;
    st.push({c, *inv, capture_fragment(s, c), snapshot(s), r->state.crashed});
    ClusterState env = r->state;
    st.rollback_last(env);
    EXPECT_TRUE(deep_equal(env, s)) << c.text;
  });
}

TEST(Property, SegmentRollbackRestoresCheckpoint) {
  Gen g(7);
  for (int i = 0; i < 150; ++i) {
    auto sc = g.scenario("seg-" + std::to_string(i));
    const auto s0 = sc.faulted();
    EngineConfig ec;
    ec.probe = fixtures::probe(20);
    Engine e(s0, ec);
    // a committed prefix so the segment sits on a non-empty stack
    auto t0 = e.begin(WriterId::Mitigation, 3);
    for (int k = 0; k < 3; ++k) (void)e.step(*t0, *parse(g.command(e.state())));
    ASSERT_TRUE(e.finalize(*t0));
    const auto mid = e.state();
    const auto depth = e.undo_stack().depth();
    auto t = e.begin(WriterId::Mitigation, 8);
    for (int k = 0; k < g.uniform(1, 8); ++k) (void)e.step(*t, *parse(g.command(e.state())));
    auto f = e.finalize(*t, true);
    ASSERT_TRUE(f) << f.error().message;
    EXPECT_TRUE(deep_equal(e.state(), mid)) << "scenario " << i;
    EXPECT_EQ(e.undo_stack().depth(), depth);
  }
}

TEST(Property, ScenarioSerializationRoundTrips) {
  Gen g(8);
  for (int i = 0; i < 100; ++i) {
    auto sc = g.scenario("rt-" + std::to_string(i));
    auto text = serialize_scenario(sc);
    auto again = serialize_scenario(parse_scenario(text));
    EXPECT_EQ(again, text);
    EXPECT_TRUE(deep_equal(parse_scenario(text).faulted(), sc.faulted()));
  }
}

TEST(Property, NoVisibleRegressionUnderRandomPolicies) {
  Gen g(9);
  for (int i = 0; i < 60; ++i) {
    auto sc = g.scenario("tnr-" + std::to_string(i));
    RandomPolicy p(g.rng()(), 20);
    RunConfig cfg;
    cfg.retry_limit = 3;
    EpisodeReport rep;
    ASSERT_NO_THROW(rep = run_episode(sc, p, cfg)) << serialize_scenario(sc);
    for (const auto& v : rep.visible) EXPECT_LE(v, rep.baseline);
    EXPECT_LE(rep.max_txn_actions, 20);
    EXPECT_LE(rep.retries, 3);
  }
}
