#pragma once

#include <string>
#include <vector>

#include "tnr/health.hpp"

namespace tnr {

enum class OracleName { Alert, Workload, Health };

inline std::string_view to_string(OracleName n) {
  switch (n) {
    case OracleName::Alert: return "Alert";
    case OracleName::Workload: return "Workload";
    case OracleName::Health: return "Health";
  }
  return "?";
}

struct OracleVerdict {
  OracleName name;
  bool pass = true;
  std::vector<std::string> issues;
};

inline OracleVerdict make_verdict(OracleName n, std::vector<std::string> issues) {
  return {n, issues.empty(), std::move(issues)};
}

inline OracleVerdict alert_oracle(const HealthReport& r) {
  return make_verdict(OracleName::Alert, {r.alerts.begin(), r.alerts.end()});
}

inline std::string workload_issue(int failed) { return "  Non-2xx or 3xx responses: " + std::to_string(failed); }

inline OracleVerdict workload_oracle(const WorkloadReport& wl) {
  if (wl.failed_requests == 0) return make_verdict(OracleName::Workload, {});
  return make_verdict(OracleName::Workload, {workload_issue(wl.failed_requests)});
}

inline OracleVerdict health_oracle(const ClusterState& s) {
  std::vector<std::string> issues;
  if (s.crashed) return make_verdict(OracleName::Health, {"Cluster is unavailable"});
  for (const auto& p : s.pods) {
    const auto* d = s.deployment(p.ns, p.owner);
    const std::string container = d ? d->container_name() : p.owner;
    switch (p.phase) {
      case PodPhase::Running: break;
      case PodPhase::Pending: issues.push_back("Pod " + p.name + " is in Pending state"); break;
      case PodPhase::CrashLoopBackOff: issues.push_back("Container " + container + " is in CrashLoopBackOff"); break;
      case PodPhase::Error: issues.push_back("Container " + container + " is in Error"); break;
    }
  }
  for (const auto& c : s.pvcs)
    if (c.status != PvcStatus::Bound) issues.push_back("PersistentVolumeClaim " + c.name + " is in Pending state");
  for (const auto& n : s.nodes) {
    if (!n.healthy) issues.push_back("Node " + n.name + " is NotReady");
    else if (!n.schedulable) issues.push_back("Node " + n.name + " is SchedulingDisabled");
  }
  return make_verdict(OracleName::Health, std::move(issues));
}

struct ValidationResult {
  bool success = false;
  std::vector<OracleVerdict> verdicts;
  std::vector<std::string> issues;  // all failing oracles, in oracle order
};

inline ValidationResult combined_validate(const ClusterState& s, const WorkloadReport& wl) {
  ValidationResult v;
  v.verdicts = {alert_oracle(health_report(s, wl)), workload_oracle(wl), health_oracle(s)};
  v.success = true;
  for (const auto& o : v.verdicts) {
    v.success = v.success && o.pass;
    v.issues.insert(v.issues.end(), o.issues.begin(), o.issues.end());
  }
  return v;
}

}  // namespace tnr
