#pragma once

#include <nlohmann/json.hpp>

#include <string>

#include "tnr/tnr.hpp"

#ifndef TNR_SOURCE_DIR
#define TNR_SOURCE_DIR "."
#endif

namespace tnr::fixtures {

inline std::string source_path(const std::string& rel) { return std::string(TNR_SOURCE_DIR) + "/" + rel; }

inline Scenario corpus(const std::string& id) { return load_scenario(source_path("scenarios/" + id + ".json")); }
inline Scenario extra(const std::string& id) { return load_scenario(source_path("scenarios/extra/" + id + ".json")); }

// Two nodes, a web tier in front of an api tier, one claim on a storage class.
inline nlohmann::json shop_json() {
  return nlohmann::json::parse(R"({
    "id": "shop",
    "namespace": "shop",
    "nodes": [{"name": "n1"}, {"name": "n2"}],
    "deployments": [
      {"name": "web", "replicas": 2, "image": "shop/web:v1"},
      {"name": "api", "replicas": 1, "image": "shop/api:v1", "container_port": 9000, "pvc_refs": ["api-data"]}
    ],
    "services": [
      {"name": "web", "port": 80, "target_port": 8080, "selector": "web"},
      {"name": "api", "port": 80, "target_port": 9000, "selector": "api"}
    ],
    "pvcs": [{"name": "api-data", "storage_class": "fast"}],
    "storage_classes": [{"name": "fast", "provisioner": "rancher.io/local-path"}],
    "provisioners": ["rancher.io/local-path"],
    "accepted_images": {"web": ["shop/web:v1", "shop/web:v2"], "api": ["shop/api:v1"]},
    "request_mix": [{"name": "browse", "weight": 3, "path": ["web"]},
                    {"name": "buy", "weight": 1, "path": ["web", "api"]}],
    "crashing": [{"verb": "delete", "kind": "node", "name": "n1"}]
  })");
}

inline Scenario shop(nlohmann::json faults = nlohmann::json::array()) {
  auto j = shop_json();
  j["faults"] = std::move(faults);
  return scenario_from_json(j);
}

inline Command cmd(const std::string& text) {
  auto c = parse(text);
  if (!c) throw std::runtime_error("fixture command does not parse: " + text);
  return *c;
}

inline ClusterState applied(const ClusterState& s, const std::string& text) {
  auto r = apply_write(s, cmd(text));
  if (!r) throw std::runtime_error("fixture write failed: " + r.error().message);
  return r->state;
}

inline ProbeConfig probe(int n = 100) { return ProbeConfig{n, 7, SeverityWeights{}}; }

}  // namespace tnr::fixtures
