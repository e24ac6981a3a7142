#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tnr/cluster.hpp"

namespace tnr {

struct Span {
  std::string service;    // caller
  std::string operation;  // downstream service being invoked
  bool error = false;

  friend bool operator==(const Span&, const Span&) = default;
};

struct Trace {
  std::string request_id;
  std::string request_type;
  std::vector<Span> spans;

  bool failed() const {
    for (const auto& s : spans)
      if (s.error) return true;
    return false;
  }
};

struct WorkloadReport {
  int total_requests = 0;
  int failed_requests = 0;
  std::vector<Trace> traces;
};

inline constexpr const char* kLoadGenerator = "loadgen";

// A service can serve traffic when it routes to a deployment with at least one
// Running pod listening on the service's target port.
inline bool service_available(const ClusterState& s, const std::string& service) {
  if (s.crashed) return false;
  const std::string& ns = s.rule_set().default_namespace;
  const auto* svc = s.service(ns, service);
  if (!svc) return false;
  const auto* d = s.deployment(ns, svc->selector);
  if (!d || d->container_port != svc->target_port) return false;
  for (const auto& p : s.pods)
    if (p.owner == d->name && p.ns == ns && p.phase == PodPhase::Running) return true;
  return false;
}

// Simulates n requests drawn from the scenario's weighted request mix. Each
// request walks its service path; the hop into the first unavailable service
// is the single error span and ends the trace. Deterministic under seed.
inline WorkloadReport run_workload(const ClusterState& s, int n, std::uint64_t seed) {
  WorkloadReport r;
  const auto& mix = s.rule_set().request_mix;
  if (n <= 0 || mix.empty()) return r;

  std::vector<int> weights;
  for (const auto& t : mix) weights.push_back(std::max(0, t.weight));
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());

  // Availability only depends on the state, so compute it once per service.
  std::map<std::string, bool> avail;
  auto available = [&](const std::string& svc) {
    auto it = avail.find(svc);
    if (it != avail.end()) return it->second;
    return avail[svc] = service_available(s, svc);
  };

  r.total_requests = n;
  r.traces.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto& type = mix[pick(rng)];
    Trace t;
    t.request_id = "req-" + std::to_string(i);
    t.request_type = type.name;
    std::string caller = kLoadGenerator;
    for (const auto& svc : type.path) {
      bool ok = available(svc);
      t.spans.push_back({caller, svc, !ok});
      if (!ok) break;
      caller = svc;
    }
    if (t.failed()) ++r.failed_requests;
    r.traces.push_back(std::move(t));
  }
  return r;
}

}  // namespace tnr
