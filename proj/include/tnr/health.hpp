#pragma once

#include <set>
#include <string>

#include "tnr/cluster.hpp"
#include "tnr/severity.hpp"
#include "tnr/workload.hpp"

namespace tnr {

// Alert set A, SLA-violation set V and capacity-loss set L. Identifiers carry a
// set prefix ("alert:", "sla:", "capacity:") so the sets never overlap.
struct HealthReport {
  std::set<std::string> alerts;
  std::set<std::string> sla_violations;
  std::set<std::string> capacity_losses;

  bool empty() const { return alerts.empty() && sla_violations.empty() && capacity_losses.empty(); }
};

inline HealthReport health_report(const ClusterState& s, const WorkloadReport& wl) {
  HealthReport r;
  if (s.crashed) {
    r.alerts.insert("alert:cluster:Unavailable");
  } else {
    for (const auto& p : s.pods)
      if (p.phase != PodPhase::Running)
        r.alerts.insert("alert:pod/" + p.ns + "/" + p.name + ":" + std::string(to_string(p.phase)));
    for (const auto& c : s.pvcs)
      if (c.status == PvcStatus::Pending) r.alerts.insert("alert:pvc/" + c.ns + "/" + c.name + ":Pending");
    for (const auto& n : s.nodes) {
      if (!n.healthy)
        r.capacity_losses.insert("capacity:node/" + n.name + ":NotReady");
      else if (!n.schedulable)
        r.capacity_losses.insert("capacity:node/" + n.name + ":SchedulingDisabled");
    }
  }
  for (const auto& t : wl.traces)
    if (t.failed()) r.sla_violations.insert("sla:" + t.request_id);
  return r;
}

// mu = w1*|A| + w2*|V| + w3*|L|, or infinity for the crash state.
inline Severity severity(const HealthReport& r, const SeverityWeights& w, bool crashed) {
  if (crashed) return Severity::infinity();
  return w.alerts * static_cast<std::int64_t>(r.alerts.size()) +
         w.sla_violations * static_cast<std::int64_t>(r.sla_violations.size()) +
         w.capacity_losses * static_cast<std::int64_t>(r.capacity_losses.size());
}

// Probe settings used whenever the severity of a state is measured.
struct ProbeConfig {
  int requests = 100;
  std::uint64_t seed = 7;
  SeverityWeights weights;
};

// Severity of a state under a fixed probe; a pure function of the state.
inline Severity measure(const ClusterState& s, const ProbeConfig& probe) {
  if (s.crashed) return Severity::infinity();
  auto wl = run_workload(s, probe.requests, probe.seed);
  return severity(health_report(s, wl), probe.weights, false);
}

}  // namespace tnr
