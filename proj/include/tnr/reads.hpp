#pragma once

// Read-class command execution: get, describe and logs against a state value.

#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "tnr/command.hpp"
#include "tnr/transition.hpp"

namespace tnr {

// Synthetic container log for a pod, newest line last.
inline std::vector<std::string> pod_logs(const ClusterState& s, const Pod& p) {
  const auto* d = s.deployment(p.ns, p.owner);
  const std::string container = d ? d->container_name() : p.owner;
  std::vector<std::string> lines;
  switch (p.phase) {
    case PodPhase::Running:
      lines.push_back("INFO starting " + container);
      lines.push_back("INFO serving on :" + std::to_string(d ? d->container_port : 0));
      break;
    case PodPhase::CrashLoopBackOff:
      lines.push_back("INFO starting " + container);
      lines.push_back("panic: " + container + ": failed to start image " + (d ? d->image : std::string("?")) +
                      ": exec format error");
      break;
    case PodPhase::Error:
      lines.push_back("INFO serving on :" + std::to_string(d ? d->container_port : 0));
      lines.push_back("ERROR " + container + " terminated: signal: killed");
      break;
    case PodPhase::Pending: break;
  }
  return lines;
}

namespace detail {

inline std::string table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (width.size() <= i) width.push_back(0);
      width[i] = std::max(width[i], r[i].size());
    }
  std::ostringstream o;
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      o << r[i];
      if (i + 1 < r.size()) o << std::string(width[i] - r[i].size() + 3, ' ');
    }
    o << "\n";
  }
  return o.str();
}

}  // namespace detail

inline std::string execute_read(const ClusterState& s, const Command& c) {
  if (classify(c) != CommandClass::Read) return "error: not a read command";
  if (s.crashed) return "The connection to the server was refused - did you specify the right host or port?";
  const std::string ns = c.ns.value_or(s.rule_set().default_namespace);
  auto missing = [&](const std::string& kind, const std::string& name) {
    return detail::not_found(kind, name).message;
  };

  if (c.verb == Verb::Logs) {
    if (!c.name) return "error: expected POD";
    const auto* p = s.pod(ns, *c.name);
    if (!p) return missing("pod", *c.name);
    if (p->phase == PodPhase::Pending)
      return "Error from server (BadRequest): container is waiting to start: ContainerCreating";
    std::string out;
    for (const auto& l : pod_logs(s, *p)) out += l + "\n";
    return out;
  }

  std::vector<std::vector<std::string>> rows;
  const bool describe = c.verb == Verb::Describe;
  std::ostringstream d;
  auto want = [&](const std::string& name) { return !c.name || *c.name == name; };
  bool found = false;

  if (c.kind == "pod" || c.kind == "all") {
    rows.push_back({"NAME", "READY", "STATUS", "RESTARTS", "NODE"});
    for (const auto& p : s.pods) {
      if (p.ns != ns || !want(p.name)) continue;
      found = true;
      rows.push_back({p.name, p.phase == PodPhase::Running ? "1/1" : "0/1", std::string(to_string(p.phase)),
                      std::to_string(p.restarts), p.node.value_or("<none>")});
      if (describe) {
        d << "Name:         " << p.name << "\nNamespace:    " << p.ns << "\nNode:         " << p.node.value_or("<none>")
          << "\nStatus:       " << to_string(p.phase) << "\nControlled By:  Deployment/" << p.owner << "\n";
        if (p.phase == PodPhase::Pending) {
          const auto* dep = s.deployment(p.ns, p.owner);
          bool unbound = false;
          for (const auto& ref : dep->pvc_refs) {
            const auto* claim = s.pvc(p.ns, ref);
            if (!claim || claim->status != PvcStatus::Bound) unbound = true;
          }
          d << "Events:\n  Warning  FailedScheduling  default-scheduler  "
            << (unbound ? "0/" + std::to_string(s.nodes.size()) +
                              " nodes are available: pod has unbound immediate PersistentVolumeClaims."
                        : "0/" + std::to_string(s.nodes.size()) +
                              " nodes are available: didn't match Pod's node affinity/selector or had no capacity.")
            << "\n";
        }
        d << "\n";
      }
    }
  }
  if (c.kind == "deployment" || c.kind == "all") {
    if (!rows.empty()) rows.push_back({});
    rows.push_back({"NAME", "READY", "IMAGE", "NODE-SELECTOR"});
    for (const auto& dep : s.deployments) {
      if (dep.ns != ns || !want(dep.name)) continue;
      found = true;
      int ready = 0;
      for (const auto* p : s.pods_of(ns, dep.name)) ready += p->phase == PodPhase::Running;
      rows.push_back({dep.name, std::to_string(ready) + "/" + std::to_string(dep.replicas), dep.image,
                      dep.node_selector.value_or("<none>")});
      if (describe)
        d << "Name:               " << dep.name << "\nReplicas:           " << dep.replicas << " desired | " << ready
          << " available\nImage:              " << dep.image << "\nPort:               " << dep.container_port
          << "/TCP\nNode-Selectors:     " << dep.node_selector.value_or("<none>") << "\n\n";
    }
  }
  if (c.kind == "service" || c.kind == "all") {
    if (!rows.empty()) rows.push_back({});
    rows.push_back({"NAME", "PORT", "TARGET-PORT", "SELECTOR"});
    for (const auto& sv : s.services) {
      if (sv.ns != ns || !want(sv.name)) continue;
      found = true;
      rows.push_back({sv.name, std::to_string(sv.port), std::to_string(sv.target_port), "app=" + sv.selector});
      if (describe)
        d << "Name:              " << sv.name << "\nSelector:          app=" << sv.selector
          << "\nPort:              " << sv.port << "/TCP\nTargetPort:        " << sv.target_port << "/TCP\n\n";
    }
  }
  if (c.kind == "endpoints") {
    rows.push_back({"NAME", "ENDPOINTS"});
    for (const auto& sv : s.services) {
      if (sv.ns != ns || !want(sv.name)) continue;
      found = true;
      std::string eps;
      const auto* dep = s.deployment(ns, sv.selector);
      for (const auto* p : s.pods_of(ns, sv.selector))
        if (p->phase == PodPhase::Running && dep)
          eps += (eps.empty() ? "" : ",") + p->name + ":" + std::to_string(dep->container_port);
      rows.push_back({sv.name, eps.empty() ? "<none>" : eps});
    }
  }
  if (c.kind == "pvc") {
    rows.push_back({"NAME", "STATUS", "STORAGECLASS"});
    for (const auto& v : s.pvcs) {
      if (v.ns != ns || !want(v.name)) continue;
      found = true;
      rows.push_back({v.name, std::string(to_string(v.status)), v.storage_class});
      if (describe) {
        d << "Name:          " << v.name << "\nNamespace:     " << v.ns << "\nStorageClass:  " << v.storage_class
          << "\nStatus:        " << to_string(v.status) << "\n";
        if (v.status == PvcStatus::Pending) {
          const auto* sc = s.storage_class(v.storage_class);
          if (!sc)
            d << "Events:\n  Warning  ProvisioningFailed  persistentvolume-controller  storageclass.storage.k8s.io \""
              << v.storage_class << "\" not found\n";
          else
            d << "Events:\n  Normal  ExternalProvisioning  persistentvolume-controller  Waiting for a volume to be "
                 "created either by the external provisioner '"
              << sc->provisioner << "' or manually by the system administrator.\n";
        }
        d << "\n";
      }
    }
  }
  if (c.kind == "storageclass") {
    rows.push_back({"NAME", "PROVISIONER", "RECLAIMPOLICY", "VOLUMEBINDINGMODE"});
    for (const auto& sc : s.storage_classes) {
      if (!want(sc.name)) continue;
      found = true;
      rows.push_back({sc.name, sc.provisioner, sc.reclaim_policy, sc.binding_mode});
    }
  }
  if (c.kind == "node") {
    rows.push_back({"NAME", "STATUS", "CAPACITY"});
    for (const auto& n : s.nodes) {
      if (!want(n.name)) continue;
      found = true;
      std::string st = n.healthy ? "Ready" : "NotReady";
      if (!n.schedulable) st += ",SchedulingDisabled";
      rows.push_back({n.name, st, n.capacity ? std::to_string(n.capacity) : "unbounded"});
    }
  }
  if (c.kind == "namespace") {
    rows.push_back({"NAME", "STATUS"});
    for (const auto& n : s.namespaces)
      if (want(n)) {
        found = true;
        rows.push_back({n, "Active"});
      }
  }
  if (c.kind == "events") {
    found = true;
    std::string out;
    for (const auto& p : s.pods)
      if (p.ns == ns && p.phase != PodPhase::Running)
        out += "Warning   " + std::string(p.phase == PodPhase::Pending ? "FailedScheduling" : "BackOff") + "   pod/" +
               p.name + "\n";
    return out.empty() ? "No resources found in " + ns + " namespace.\n" : out;
  }
  if (rows.empty()) return "error: the server doesn't have a resource type \"" + c.kind + "\"";
  if (!found) {
    if (c.name) return missing(c.kind, *c.name);
    return "No resources found in " + ns + " namespace.\n";
  }
  return describe && !d.str().empty() ? d.str() : detail::table(rows);
}

}  // namespace tnr
