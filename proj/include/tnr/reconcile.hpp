#pragma once

#include <map>

#include "tnr/cluster.hpp"

namespace tnr {

namespace detail {

inline std::string new_pod_name(ClusterState& s, const Deployment& d, const std::string& hash) {
  auto serial = s.pod_serial++;
  return d.name + "-" + hash + "-" + base36(fnv1a(d.ns + "/" + d.name + "#" + std::to_string(serial)), 5);
}

}  // namespace detail

// Drives the actual state toward the declared state:
//  - a PVC is Bound iff its storage class exists with an installed provisioner;
//  - each deployment owns exactly `replicas` pods, ordinals 0..replicas-1;
//    pods whose template changed are recreated (clearing transient faults);
//  - pods are placed on schedulable, healthy nodes with free capacity, in
//    (namespace, deployment, ordinal) order onto the least loaded node;
//  - phase: killed -> Error, unplaceable or unbound claim -> Pending,
//    image not accepted -> CrashLoopBackOff, otherwise Running.
// Deterministic and idempotent. Crashed states are returned unchanged.
inline ClusterState reconcile(ClusterState s) {
  if (s.crashed) return s;
  const auto& rules = s.rule_set();

  for (auto& pvc : s.pvcs) {
    const auto* sc = s.storage_class(pvc.storage_class);
    pvc.status = (sc && rules.provisioner_ok(sc->provisioner)) ? PvcStatus::Bound : PvcStatus::Pending;
  }

  std::vector<Pod> next;
  next.reserve(s.pods.size());
  for (const auto& d : s.deployments) {
    const auto hash = pod_template_hash(d);
    for (int ord = 0; ord < d.replicas; ++ord) {
      const Pod* existing = nullptr;
      for (const auto& p : s.pods)
        if (p.owner == d.name && p.ns == d.ns && p.ordinal == ord) existing = &p;
      if (existing && existing->template_hash == hash) {
        next.push_back(*existing);
        continue;
      }
      Pod p;
      p.owner = d.name;
      p.ns = d.ns;
      p.ordinal = ord;
      p.template_hash = hash;
      p.name = detail::new_pod_name(s, d, hash);
      p.killed = rules.persistent_kills.count(d.ns + "/" + d.name + "#" + std::to_string(ord)) > 0;
      next.push_back(std::move(p));
    }
  }
  s.pods = std::move(next);
  s.canonicalize();

  std::map<std::string, int> load;
  for (const auto& n : s.nodes) load[n.name] = 0;

  for (auto& pod : s.pods) {
    const auto* d = s.deployment(pod.ns, pod.owner);
    bool claims_bound = true;
    for (const auto& ref : d->pvc_refs) {
      const auto* c = s.pvc(d->ns, ref);
      if (!c || c->status != PvcStatus::Bound) claims_bound = false;
    }
    pod.node.reset();
    if (claims_bound) {
      const Node* best = nullptr;
      for (const auto& n : s.nodes) {
        if (!n.schedulable || !n.healthy) continue;
        if (d->node_selector && *d->node_selector != n.name) continue;
        if (n.capacity > 0 && load[n.name] >= n.capacity) continue;
        if (!best || load[n.name] < load[best->name]) best = &n;
      }
      if (best) {
        pod.node = best->name;
        ++load[best->name];
      }
    }

    if (pod.killed)
      pod.phase = PodPhase::Error;
    else if (!pod.node)
      pod.phase = PodPhase::Pending;
    else if (!rules.image_ok(d->name, d->image))
      pod.phase = PodPhase::CrashLoopBackOff;
    else
      pod.phase = PodPhase::Running;

    if (pod.phase == PodPhase::CrashLoopBackOff && pod.restarts == 0) pod.restarts = 5;
  }
  return s;
}

}  // namespace tnr
