#pragma once

// Resource manifests carried inline by apply commands. Only the fields the
// cluster model tracks are read; everything else in the document is ignored.

#include <yaml-cpp/yaml.h>

#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>

#include "tnr/cluster.hpp"

namespace tnr {

using Manifest = std::variant<Deployment, Service, Pvc, StorageClass, Node>;

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string manifest_kind(const Manifest& m) {
  struct V {
    std::string operator()(const Deployment&) const { return "deployment"; }
    std::string operator()(const Service&) const { return "service"; }
    std::string operator()(const Pvc&) const { return "pvc"; }
    std::string operator()(const StorageClass&) const { return "storageclass"; }
    std::string operator()(const Node&) const { return "node"; }
  };
  return std::visit(V{}, m);
}

inline std::string manifest_name(const Manifest& m) {
  return std::visit([](const auto& r) { return r.name; }, m);
}

inline std::string manifest_namespace(const Manifest& m) {
  return std::visit(
      [](const auto& r) -> std::string {
        if constexpr (requires { r.ns; })
          return r.ns;
        else
          return {};
      },
      m);
}

inline void set_manifest_namespace(Manifest& m, const std::string& ns) {
  std::visit(
      [&](auto& r) {
        if constexpr (requires { r.ns; }) r.ns = ns;
      },
      m);
}

namespace detail {

inline std::string req_str(const YAML::Node& n, const char* what) {
  if (!n || !n.IsScalar()) throw ManifestError(std::string("missing field ") + what);
  return n.as<std::string>();
}

inline int opt_int(const YAML::Node& n, int fallback) {
  if (!n) return fallback;
  try {
    return n.as<int>();
  } catch (const YAML::Exception&) {
    throw ManifestError("expected integer, got '" + n.as<std::string>() + "'");
  }
}

}  // namespace detail

inline Manifest parse_manifest(const std::string& yaml_text) {
  YAML::Node doc;
  try {
    doc = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ManifestError(std::string("invalid YAML: ") + e.what());
  }
  if (!doc.IsMap()) throw ManifestError("manifest is not a mapping");
  const std::string kind = detail::req_str(doc["kind"], "kind");
  const auto meta = doc["metadata"];
  if (!meta || !meta.IsMap()) throw ManifestError("missing metadata");
  const std::string name = detail::req_str(meta["name"], "metadata.name");
  const std::string ns = meta["namespace"] ? meta["namespace"].as<std::string>() : std::string{};
  const auto spec = doc["spec"];

  if (kind == "StorageClass") {
    StorageClass sc;
    sc.name = name;
    sc.provisioner = detail::req_str(doc["provisioner"], "provisioner");
    if (doc["volumeBindingMode"]) sc.binding_mode = doc["volumeBindingMode"].as<std::string>();
    if (doc["reclaimPolicy"]) sc.reclaim_policy = doc["reclaimPolicy"].as<std::string>();
    return sc;
  }
  if (kind == "PersistentVolumeClaim") {
    Pvc p;
    p.name = name;
    p.ns = ns;
    if (!spec) throw ManifestError("missing spec");
    p.storage_class = detail::req_str(spec["storageClassName"], "spec.storageClassName");
    return p;
  }
  if (kind == "Service") {
    Service s;
    s.name = name;
    s.ns = ns;
    if (!spec) throw ManifestError("missing spec");
    s.selector = detail::req_str(spec["selector"]["app"], "spec.selector.app");
    const auto ports = spec["ports"];
    if (!ports || !ports.IsSequence() || ports.size() == 0) throw ManifestError("missing spec.ports");
    s.port = detail::opt_int(ports[0]["port"], 80);
    s.target_port = detail::opt_int(ports[0]["targetPort"], s.port);
    return s;
  }
  if (kind == "Deployment") {
    Deployment d;
    d.name = name;
    d.ns = ns;
    if (!spec) throw ManifestError("missing spec");
    d.replicas = detail::opt_int(spec["replicas"], 1);
    if (d.replicas < 0) throw ManifestError("spec.replicas must be non-negative");
    const auto pod = spec["template"]["spec"];
    if (!pod) throw ManifestError("missing spec.template.spec");
    const auto containers = pod["containers"];
    if (!containers || !containers.IsSequence() || containers.size() == 0)
      throw ManifestError("missing spec.template.spec.containers");
    d.container = containers[0]["name"] ? containers[0]["name"].as<std::string>() : name;
    if (d.container == name) d.container.clear();
    d.image = detail::req_str(containers[0]["image"], "image");
    if (auto ports = containers[0]["ports"]; ports && ports.IsSequence() && ports.size() > 0)
      d.container_port = detail::opt_int(ports[0]["containerPort"], d.container_port);
    if (auto sel = pod["nodeSelector"]; sel && sel.IsMap() && sel["kubernetes.io/hostname"])
      d.node_selector = sel["kubernetes.io/hostname"].as<std::string>();
    if (auto vols = pod["volumes"]; vols && vols.IsSequence()) {
      for (const auto& v : vols)
        if (v["persistentVolumeClaim"]) d.pvc_refs.push_back(detail::req_str(v["persistentVolumeClaim"]["claimName"], "claimName"));
    }
    return d;
  }
  if (kind == "Node") {
    Node n;
    n.name = name;
    if (spec && spec["unschedulable"]) n.schedulable = !spec["unschedulable"].as<bool>();
    if (auto status = doc["status"]) {
      n.capacity = detail::opt_int(status["capacity"]["pods"], 0);
      if (auto conds = status["conditions"]; conds && conds.IsSequence()) {
        for (const auto& c : conds)
          if (c["type"] && c["type"].as<std::string>() == "Ready") n.healthy = c["status"].as<std::string>() == "True";
      }
    }
    return n;
  }
  throw ManifestError("unsupported kind: " + kind);
}

inline std::string render_manifest(const Manifest& m) {
  std::ostringstream o;
  auto meta = [&](const std::string& name, const std::string& ns) {
    o << "metadata:\n  name: " << name << "\n";
    if (!ns.empty()) o << "  namespace: " << ns << "\n";
  };
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, StorageClass>) {
          o << "apiVersion: storage.k8s.io/v1\nkind: StorageClass\n";
          meta(r.name, "");
          o << "provisioner: " << r.provisioner << "\nreclaimPolicy: " << r.reclaim_policy
            << "\nvolumeBindingMode: " << r.binding_mode << "\n";
        } else if constexpr (std::is_same_v<T, Pvc>) {
          o << "apiVersion: v1\nkind: PersistentVolumeClaim\n";
          meta(r.name, r.ns);
          o << "spec:\n  storageClassName: " << r.storage_class << "\n";
        } else if constexpr (std::is_same_v<T, Service>) {
          o << "apiVersion: v1\nkind: Service\n";
          meta(r.name, r.ns);
          o << "spec:\n  selector:\n    app: " << r.selector << "\n  ports:\n  - port: " << r.port
            << "\n    targetPort: " << r.target_port << "\n";
        } else if constexpr (std::is_same_v<T, Deployment>) {
          o << "apiVersion: apps/v1\nkind: Deployment\n";
          meta(r.name, r.ns);
          o << "spec:\n  replicas: " << r.replicas << "\n  template:\n    spec:\n";
          if (r.node_selector) o << "      nodeSelector:\n        kubernetes.io/hostname: " << *r.node_selector << "\n";
          o << "      containers:\n      - name: " << r.container_name() << "\n        image: " << r.image
            << "\n        ports:\n        - containerPort: " << r.container_port << "\n";
          if (!r.pvc_refs.empty()) {
            o << "      volumes:\n";
            for (const auto& c : r.pvc_refs) o << "      - persistentVolumeClaim:\n          claimName: " << c << "\n";
          }
        } else {
          o << "apiVersion: v1\nkind: Node\n";
          meta(r.name, "");
          o << "spec:\n  unschedulable: " << (r.schedulable ? "false" : "true") << "\nstatus:\n  capacity:\n    pods: "
            << r.capacity << "\n  conditions:\n  - type: Ready\n    status: \"" << (r.healthy ? "True" : "False")
            << "\"\n";
        }
      },
      m);
  return o.str();
}

}  // namespace tnr
