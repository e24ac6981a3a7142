#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "support/confinement.hpp"
#include "support/fixtures.hpp"

using namespace tnr;
using fixtures::applied;
using fixtures::cmd;
using fixtures::shop;

TEST(Parse, VerbsKindsAndFlags) {
  auto c = cmd("kubectl scale deploy web --replicas=3 -n shop");
  EXPECT_EQ(c.verb, Verb::Scale);
  EXPECT_EQ(c.kind, "deployment");
  EXPECT_EQ(c.name, std::optional<std::string>("web"));
  EXPECT_EQ(c.ns, std::optional<std::string>("shop"));
  EXPECT_EQ(c.flag_value({"--replicas"}), std::optional<std::string>("3"));
  EXPECT_EQ(classify(c), CommandClass::Write);

  auto g = cmd("kubectl get pods -n shop -o wide");
  EXPECT_EQ(g.verb, Verb::Get);
  EXPECT_EQ(g.kind, "pod");
  EXPECT_EQ(classify(g), CommandClass::Read);

  auto r = cmd("kubectl rollout restart deployment/web -n shop");
  EXPECT_EQ(r.verb, Verb::RolloutRestart);
  EXPECT_EQ(r.name, std::optional<std::string>("web"));

  auto p = cmd(R"(kubectl patch svc geo --type merge -p '{"spec":{"ports":[{"targetPort":8083}]}}')");
  EXPECT_EQ(p.kind, "service");
  EXPECT_EQ(p.flag_value({"-p", "--patch"}), std::optional<std::string>(R"({"spec":{"ports":[{"targetPort":8083}]}})"));
}

TEST(Parse, HeredocCarriesAManifest) {
  auto c = cmd("kubectl apply -f - <<EOF\napiVersion: storage.k8s.io/v1\nkind: StorageClass\nmetadata:\n  name: fast\n"
               "provisioner: rancher.io/local-path\nEOF");
  EXPECT_TRUE(c.heredoc);
  ASSERT_TRUE(c.manifest.has_value());
  EXPECT_EQ(manifest_kind(*c.manifest), "storageclass");
}

TEST(Parse, ShellConstructsAreReportedBeforeVerbDispatch) {
  auto e = parse("kubectl frobnicate | cat");
  ASSERT_FALSE(e);
  EXPECT_EQ(e.error().kind, ParseErrorKind::PipeDetected);
  // quoted operators are data
  EXPECT_TRUE(parse("kubectl patch svc a --type merge -p '{\"a\":\"x|y;z\"}'"));
  auto m = parse("kubectl");
  ASSERT_FALSE(m);
  EXPECT_EQ(m.error().kind, ParseErrorKind::Malformed);
}

TEST(Render, RoundTripsThroughTheParser) {
  CommandSpec spec{Verb::Patch, "deployment", "web", "shop", {{"--type", "merge"}, {"-p", R"({"spec":{"replicas":2}})"}},
                   std::nullopt};
  auto c = make_command(spec);
  auto again = cmd(c.text);
  EXPECT_EQ(again.verb, Verb::Patch);
  EXPECT_EQ(again.name, c.name);
  EXPECT_EQ(again.flags, c.flags);
}

TEST(Lint, ConfinementCorpusExactMessages) {
  for (const auto& tc : fixtures::confinement_corpus()) {
    auto v = check(tc.command, tc.reader ? Role::ReadOnly : Role::Writer);
    EXPECT_EQ(v.allowed ? std::string("allowed") : v.reason, tc.expected) << tc.command;
  }
}

TEST(Lint, RequiredMessagesAreVerbatim) {
  EXPECT_EQ(check("kubectl apply -f -", Role::Writer).reason, "Stdin redirection is not allowed.");
  EXPECT_EQ(check("kubectl exec -it pod-1 -- bash", Role::Writer).reason,
            "Interactive flag detected: -it. Such commands are not supported.");
}

TEST(Lint, MessagesFileMirrorsTheCatalog) {
  std::ifstream in(fixtures::source_path("docs/messages.txt"));
  ASSERT_TRUE(in) << "docs/messages.txt missing";
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);)
    if (!l.empty()) lines.push_back(l);
  ASSERT_EQ(lines.size(), kMessageCatalog.size());
  for (std::size_t i = 0; i < lines.size(); ++i)
    EXPECT_EQ(lines[i], std::string(kMessageCatalog[i].key) + "\t" + std::string(kMessageCatalog[i].message));
}

TEST(Inverse, SynthesizedForEveryWriteShape) {
  auto s = shop().initial;
  auto inv = [&](const std::string& t) {
    auto r = synthesize_inverse(s, cmd(t));
    EXPECT_TRUE(r) << t;
    return r ? r->text() : std::string();
  };
  EXPECT_EQ(inv("kubectl scale deployment web --replicas=5 -n shop"),
            "kubectl scale deployment web -n shop --replicas=2");
  EXPECT_EQ(inv("kubectl cordon n1"), "kubectl uncordon n1");
  EXPECT_EQ(inv("kubectl uncordon n1"), "kubectl uncordon n1");
  EXPECT_NE(inv("kubectl delete service api -n shop").find("kubectl apply -f - <<EOF"), std::string::npos);
  EXPECT_NE(inv("kubectl create deployment extra --image=x -n shop").find("kubectl delete deployment extra"),
            std::string::npos);
  auto pod = s.pods.front().name;
  auto r = synthesize_inverse(s, cmd("kubectl delete pod " + pod + " -n shop"));
  ASSERT_TRUE(r);
  EXPECT_TRUE(r->noop);
}

TEST(Inverse, RestoresThePriorState) {
  auto s = shop().initial;
  for (const std::string t :
       {"kubectl scale deployment web --replicas=0 -n shop", "kubectl cordon n2",
        R"(kubectl patch deployment web -n shop --type merge -p '{"spec":{"template":{"spec":{"containers":[{"image":"shop/web:v9"}]}}}}')",
        R"(kubectl patch service api -n shop --type merge -p '{"spec":{"ports":[{"targetPort":1}]}}')",
        "kubectl delete storageclass fast", "kubectl delete deployment api -n shop",
        "kubectl create deployment extra --image=x -n shop"}) {
    auto c = cmd(t);
    auto inv = synthesize_inverse(s, c);
    ASSERT_TRUE(inv) << t;
    auto after = applied(s, t);
    ASSERT_FALSE(inv->noop) << t;
    auto back = apply_write(after, *inv->command);
    ASSERT_TRUE(back) << t << ": " << back.error().message;
    EXPECT_TRUE(deep_equal(back->state, s)) << t;
  }
}

TEST(DryRun, PredictsWithoutMutating) {
  const auto s = shop().initial;
  const auto copy = s;
  auto ok = dry_run(s, cmd("kubectl scale deployment web --replicas=1 -n shop"));
  EXPECT_TRUE(ok.ok);
  EXPECT_NE(ok.message.find("(dry run)"), std::string::npos);
  auto bad = dry_run(s, cmd("kubectl scale deployment ghost --replicas=1 -n shop"));
  EXPECT_FALSE(bad.ok);
  EXPECT_NE(bad.message.find("NotFound"), std::string::npos);
  auto crash = dry_run(s, cmd("kubectl delete node n1"));
  EXPECT_TRUE(crash.ok);
  EXPECT_NE(crash.message.find("takes the cluster down"), std::string::npos);
  EXPECT_EQ(s.pods, copy.pods);
  EXPECT_TRUE(deep_equal(s, copy));
}

TEST(Writes, ImmutableAndUnknownTargets) {
  auto s = shop().initial;
  auto r = apply_write(s, cmd(R"(kubectl patch pvc api-data -n shop --type merge -p '{"spec":{"storageClassName":"x"}}')"));
  ASSERT_FALSE(r);
  EXPECT_EQ(r.error().code, WriteErrorCode::ImmutableFieldConflict);
  auto u = apply_write(s, cmd("kubectl delete deployment ghost -n shop"));
  ASSERT_FALSE(u);
  EXPECT_EQ(u.error().code, WriteErrorCode::UnknownTarget);
  auto dup = apply_write(s, cmd("kubectl create deployment web --image=x -n shop"));
  ASSERT_FALSE(dup);
  EXPECT_EQ(dup.error().code, WriteErrorCode::AlreadyExists);
}

TEST(Writes, CrashingTransitionTakesTheClusterDown) {
  auto s = applied(shop().initial, "kubectl delete node n1");
  EXPECT_TRUE(s.crashed);
  auto again = apply_write(s, cmd("kubectl cordon n2"));
  ASSERT_FALSE(again);
  EXPECT_EQ(again.error().code, WriteErrorCode::ClusterUnavailable);
}

TEST(Reads, GetDescribeLogs) {
  auto s = shop({{{"kind", "WrongImage"}, {"target", "web"}}}).faulted();
  auto pods = execute_read(s, cmd("kubectl get pods -n shop"));
  EXPECT_NE(pods.find("CrashLoopBackOff"), std::string::npos);
  auto svc = execute_read(s, cmd("kubectl describe service api -n shop"));
  EXPECT_NE(svc.find("TargetPort:        9000/TCP"), std::string::npos);
  const auto* web = s.pods_of("shop", "web").front();
  auto logs = execute_read(s, cmd("kubectl logs " + web->name + " -n shop"));
  EXPECT_FALSE(logs.empty());
  EXPECT_NE(execute_read(s, cmd("kubectl get pod ghost -n shop")).find("NotFound"), std::string::npos);
}
