#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "tnr/reconcile.hpp"

namespace tnr {

enum class FaultKind {
  MissingStorageClass,
  WrongImage,
  TargetPortMisconfig,
  ScaleToZero,
  AssignNonexistentNode,
  PodKillTransient,
  NoOp,
};

inline std::string_view to_string(FaultKind k) {
  switch (k) {
    case FaultKind::MissingStorageClass: return "MissingStorageClass";
    case FaultKind::WrongImage: return "WrongImage";
    case FaultKind::TargetPortMisconfig: return "TargetPortMisconfig";
    case FaultKind::ScaleToZero: return "ScaleToZero";
    case FaultKind::AssignNonexistentNode: return "AssignNonexistentNode";
    case FaultKind::PodKillTransient: return "PodKillTransient";
    case FaultKind::NoOp: return "NoOp";
  }
  return "?";
}

inline std::optional<FaultKind> fault_kind_from(std::string_view s) {
  for (auto k : {FaultKind::MissingStorageClass, FaultKind::WrongImage, FaultKind::TargetPortMisconfig,
                 FaultKind::ScaleToZero, FaultKind::AssignNonexistentNode, FaultKind::PodKillTransient, FaultKind::NoOp})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

struct FaultSpec {
  FaultKind kind = FaultKind::NoOp;
  std::string target;  // resource name; namespace comes from params["namespace"] or the default namespace
  std::map<std::string, std::string> params;
  bool persistent = true;

  friend bool operator==(const FaultSpec&, const FaultSpec&) = default;
};

class InvalidTarget : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Params:
//   WrongImage             image (default "<image>-nonexistent")
//   TargetPortMisconfig    target_port (default target_port + 1)
//   AssignNonexistentNode  node (default "nonexistent-node")
//   PodKillTransient       ordinal (default 0)
// A PodKillTransient with persistent=false clears when the pod is recreated;
// with persistent=true every pod in that slot comes back killed.
inline ClusterState inject_fault(const ClusterState& state, const FaultSpec& spec) {
  if (spec.kind == FaultKind::NoOp) return state;
  if (state.crashed) throw InvalidTarget("cannot inject into a crashed cluster");
  ClusterState s = state;
  const auto param = [&](const std::string& k) -> std::optional<std::string> {
    auto it = spec.params.find(k);
    if (it == spec.params.end()) return std::nullopt;
    return it->second;
  };
  const std::string ns = param("namespace").value_or(s.rule_set().default_namespace);
  auto need_deployment = [&]() -> Deployment& {
    auto* d = s.deployment(ns, spec.target);
    if (!d) throw InvalidTarget("no deployment " + ns + "/" + spec.target);
    return *d;
  };

  switch (spec.kind) {
    case FaultKind::MissingStorageClass: {
      auto it = std::find_if(s.storage_classes.begin(), s.storage_classes.end(),
                             [&](const StorageClass& c) { return c.name == spec.target; });
      if (it == s.storage_classes.end()) throw InvalidTarget("no storage class " + spec.target);
      s.storage_classes.erase(it);
      break;
    }
    case FaultKind::WrongImage: {
      auto& d = need_deployment();
      d.image = param("image").value_or(d.image + "-nonexistent");
      break;
    }
    case FaultKind::TargetPortMisconfig: {
      auto* svc = s.service(ns, spec.target);
      if (!svc) throw InvalidTarget("no service " + ns + "/" + spec.target);
      svc->target_port = param("target_port") ? std::stoi(*param("target_port")) : svc->target_port + 1;
      break;
    }
    case FaultKind::ScaleToZero: need_deployment().replicas = 0; break;
    case FaultKind::AssignNonexistentNode: {
      auto& d = need_deployment();
      auto node = param("node").value_or("nonexistent-node");
      if (s.node(node)) throw InvalidTarget("node " + node + " exists");
      d.node_selector = node;
      break;
    }
    case FaultKind::PodKillTransient: {
      auto& d = need_deployment();
      int ordinal = param("ordinal") ? std::stoi(*param("ordinal")) : 0;
      if (ordinal < 0 || ordinal >= d.replicas) throw InvalidTarget("no pod with ordinal " + std::to_string(ordinal));
      s = reconcile(std::move(s));
      for (auto& p : s.pods)
        if (p.owner == spec.target && p.ns == ns && p.ordinal == ordinal) p.killed = true;
      if (spec.persistent) {
        auto rules = std::make_shared<ClusterRules>(s.rule_set());
        rules->persistent_kills.insert(ns + "/" + spec.target + "#" + std::to_string(ordinal));
        s.rules = std::move(rules);
      }
      break;
    }
    case FaultKind::NoOp: break;
  }
  s.canonicalize();
  return reconcile(std::move(s));
}

}  // namespace tnr
