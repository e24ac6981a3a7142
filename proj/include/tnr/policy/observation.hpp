#pragma once

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tnr/health.hpp"
#include "tnr/manifest.hpp"
#include "tnr/policy/bootstrap.hpp"
#include "tnr/reads.hpp"

namespace tnr {

struct ReflectionNote {
  int round = 0;
  std::vector<std::string> issues;       // verbatim oracle issue strings
  std::string prior_plan;                // summary of the plan that just failed
  std::vector<std::string> plan_history;  // every failed plan so far, oldest first
  std::string hypothesis;
};

struct PodRow {
  std::string name;
  std::string owner;
  std::string phase;
  int restarts = 0;
};

// Resource names and tunables a policy may target. Only what `get` shows.
struct Inventory {
  struct DeploymentInfo {
    std::string name;
    int replicas = 0;
    std::string image;
    int container_port = 0;
  };
  struct ServiceInfo {
    std::string name;
    int port = 0;
    int target_port = 0;
  };
  std::vector<DeploymentInfo> deployments;
  std::vector<ServiceInfo> services;
  std::vector<std::string> nodes;
  std::vector<std::string> pvcs;
  std::vector<std::string> storage_classes;
};

struct ObservationBundle {
  int attempt = 1;
  std::string ns;
  std::vector<std::string> alerts;  // alert and capacity-loss identifiers
  std::vector<PodRow> pods;
  std::map<std::string, std::vector<std::string>> logs;  // deployment -> error lines
  std::vector<Suspect> suspects;
  int total_requests = 0;
  int failed_requests = 0;
  std::optional<ReflectionNote> reflection;
  Inventory inventory;
};

inline bool is_error_line(const std::string& l) {
  return l.rfind("ERROR", 0) == 0 || l.rfind("panic:", 0) == 0 || l.find("error") != std::string::npos;
}

// Built from read-class views of the state only; the state is untouched.
inline ObservationBundle observe(const ClusterState& s, int probe_requests, std::uint64_t seed, int attempt,
                                 std::optional<ReflectionNote> reflection) {
  ObservationBundle o;
  o.attempt = attempt;
  o.ns = s.rule_set().default_namespace;
  o.reflection = std::move(reflection);
  auto wl = run_workload(s, probe_requests, seed);
  auto hr = health_report(s, wl);
  o.alerts.assign(hr.alerts.begin(), hr.alerts.end());
  o.alerts.insert(o.alerts.end(), hr.capacity_losses.begin(), hr.capacity_losses.end());
  o.total_requests = wl.total_requests;
  o.failed_requests = wl.failed_requests;
  o.suspects = bootstrap_localize(wl.traces);
  if (s.crashed) return o;
  for (const auto& p : s.pods) {
    o.pods.push_back({p.name, p.owner, std::string(to_string(p.phase)), p.restarts});
    for (const auto& line : pod_logs(s, p))
      if (is_error_line(line)) o.logs[p.owner].push_back(line);
  }
  for (const auto& d : s.deployments) o.inventory.deployments.push_back({d.name, d.replicas, d.image, d.container_port});
  for (const auto& v : s.services) o.inventory.services.push_back({v.name, v.port, v.target_port});
  for (const auto& n : s.nodes) o.inventory.nodes.push_back(n.name);
  for (const auto& c : s.pvcs) o.inventory.pvcs.push_back(c.name);
  for (const auto& c : s.storage_classes) o.inventory.storage_classes.push_back(c.name);
  return o;
}

inline nlohmann::json to_json(const ReflectionNote& n) {
  return {{"round", n.round},
          {"issues", n.issues},
          {"prior_plan", n.prior_plan},
          {"plan_history", n.plan_history},
          {"hypothesis", n.hypothesis}};
}

inline ReflectionNote reflection_from_json(const nlohmann::json& j) {
  ReflectionNote n;
  n.round = j.at("round").get<int>();
  n.issues = j.at("issues").get<std::vector<std::string>>();
  n.prior_plan = j.at("prior_plan").get<std::string>();
  n.plan_history = j.at("plan_history").get<std::vector<std::string>>();
  n.hypothesis = j.at("hypothesis").get<std::string>();
  return n;
}

inline nlohmann::json to_json(const ObservationBundle& o) {
  nlohmann::json pods = nlohmann::json::array();
  for (const auto& p : o.pods)
    pods.push_back({{"name", p.name}, {"owner", p.owner}, {"phase", p.phase}, {"restarts", p.restarts}});
  nlohmann::json suspects = nlohmann::json::array();
  for (const auto& s : o.suspects)
    suspects.push_back({{"service", s.service}, {"operation", s.operation}, {"count", s.count}});
  nlohmann::json inv;
  inv["deployments"] = nlohmann::json::array();
  for (const auto& d : o.inventory.deployments)
    inv["deployments"].push_back(
        {{"name", d.name}, {"replicas", d.replicas}, {"image", d.image}, {"container_port", d.container_port}});
  inv["services"] = nlohmann::json::array();
  for (const auto& v : o.inventory.services)
    inv["services"].push_back({{"name", v.name}, {"port", v.port}, {"target_port", v.target_port}});
  inv["nodes"] = o.inventory.nodes;
  inv["pvcs"] = o.inventory.pvcs;
  inv["storage_classes"] = o.inventory.storage_classes;
  return {{"attempt", o.attempt},
          {"namespace", o.ns},
          {"alerts", o.alerts},
          {"pods", pods},
          {"logs", o.logs},
          {"suspects", suspects},
          {"total_requests", o.total_requests},
          {"failed_requests", o.failed_requests},
          {"reflection", o.reflection ? to_json(*o.reflection) : nlohmann::json(nullptr)},
          {"inventory", inv}};
}

}  // namespace tnr
