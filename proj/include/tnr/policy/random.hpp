#pragma once

#include <nlohmann/json.hpp>

#include <random>
#include <string>
#include <vector>

#include "tnr/policy/policy.hpp"

namespace tnr {

// Fuzzing policy: plans of random lint-passing commands over the resources
// named in the observation. Reproducible for a given seed and call sequence.
class RandomPolicy : public Policy {
 public:
  explicit RandomPolicy(std::uint64_t seed, int max_len = 20) : rng_(seed), max_len_(std::max(1, max_len)) {}

  std::string name() const override { return "random"; }

  Expected<MitigationPlan, PolicyError> propose(const ObservationBundle& o) override {
    MitigationPlan p;
    p.intent = "random exploration";
    p.expected_effect = "unknown";
    const int n = uniform(1, max_len_);
    for (int i = 0; i < n; ++i) p.commands.push_back(sample(o));
    return p;
  }

  // One random command against the observed inventory.
  std::string sample(const ObservationBundle& o) {
    const auto& inv = o.inventory;
    const std::string ns = o.ns;
    using J = nlohmann::json;
    for (;;) {
      switch (uniform(0, 14)) {
        case 0:
          if (inv.deployments.empty()) break;
          return make_command({Verb::Scale, "deployment", pick(inv.deployments).name, ns,
                               {{"--replicas", std::to_string(uniform(0, 4))}}, std::nullopt})
              .text;
        case 1: {
          if (inv.deployments.empty()) break;
          std::vector<std::string> images{"registry.local/broken:0.0"};
          for (const auto& d : inv.deployments) images.push_back(d.image);
          J patch = {{"spec", {{"template", {{"spec", {{"containers", J::array({{{"image", pick(images)}}})}}}}}}}};
          return patch_cmd("deployment", pick(inv.deployments).name, ns, patch);
        }
        case 2: {
          if (inv.deployments.empty()) break;
          std::vector<std::string> nodes = inv.nodes;
          nodes.push_back("nonexistent-node");
          J sel = coin() ? J(nullptr) : J{{"kubernetes.io/hostname", pick(nodes)}};
          J patch = {{"spec", {{"template", {{"spec", {{"nodeSelector", sel}}}}}}}};
          return patch_cmd("deployment", pick(inv.deployments).name, ns, patch);
        }
        case 3: {
          if (inv.services.empty()) break;
          std::vector<int> ports{1234};
          for (const auto& d : inv.deployments) ports.push_back(d.container_port);
          J patch = {{"spec", {{"ports", J::array({{{"targetPort", pick(ports)}}})}}}};
          return patch_cmd("service", pick(inv.services).name, ns, patch);
        }
        case 4:
          if (inv.nodes.empty()) break;
          return make_command({coin() ? Verb::Cordon : Verb::Uncordon, "node", pick(inv.nodes), std::nullopt, {},
                               std::nullopt})
              .text;
        case 5:
          if (o.pods.empty()) break;
          return make_command({Verb::Delete, "pod", pick(o.pods).name, ns, {}, std::nullopt}).text;
        case 6:
          if (inv.deployments.empty()) break;
          return make_command({Verb::RolloutRestart, "deployment", pick(inv.deployments).name, ns, {}, std::nullopt})
              .text;
        case 7: {
          std::vector<std::string> names = inv.storage_classes;
          names.push_back("fuzz-storage");
          StorageClass sc{pick(names),
                          pick(std::vector<std::string>{"rancher.io/local-path", "kubernetes.io/aws-ebs",
                                                        "kubernetes.io/no-provisioner"}),
                          "Immediate", "Delete"};
          return make_command({Verb::Apply, "storageclass", sc.name, std::nullopt, {}, Manifest{sc}}).text;
        }
        case 8:
          if (inv.storage_classes.empty()) break;
          return make_command({Verb::Delete, "storageclass", pick(inv.storage_classes), ns, {}, std::nullopt}).text;
        case 9:
          if (inv.services.empty()) break;
          return make_command({Verb::Delete, "service", pick(inv.services).name, ns, {}, std::nullopt}).text;
        case 10:
          if (inv.pvcs.empty()) break;
          return make_command({Verb::Delete, "pvc", pick(inv.pvcs), ns, {}, std::nullopt}).text;
        case 11:
          if (inv.deployments.empty()) break;
          return make_command({Verb::Delete, "deployment", pick(inv.deployments).name, ns, {}, std::nullopt}).text;
        case 12:
          if (inv.nodes.empty()) break;
          return make_command({Verb::Delete, "node", pick(inv.nodes), std::nullopt, {}, std::nullopt}).text;
        case 13:
          return make_command({Verb::Create, "deployment", "fuzz-" + std::to_string(uniform(0, 3)), ns,
                               {{"--image", "registry.local/fuzz:1.0"}}, std::nullopt})
              .text;
        default:
          return make_command({coin() ? Verb::Get : Verb::Describe, coin() ? "pod" : "pvc", {}, ns, {}, std::nullopt})
              .text;
      }
    }
  }

 private:
  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return uniform(0, 1) == 1; }
  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(uniform(0, static_cast<int>(v.size()) - 1))];
  }
  static std::string patch_cmd(const std::string& kind, const std::string& name, const std::string& ns,
                               const nlohmann::json& body) {
    return make_command({Verb::Patch, kind, name, ns, {{"--type", "merge"}, {"-p", body.dump()}}, std::nullopt}).text;
  }

  std::mt19937_64 rng_;
  int max_len_;
};

}  // namespace tnr
