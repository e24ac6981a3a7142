#pragma once

// Simulated cluster state. A ClusterState is a plain value: every operation
// that changes the cluster produces a successor value.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace tnr {

enum class PodPhase { Pending, Running, Error, CrashLoopBackOff };
enum class PvcStatus { Pending, Bound };

inline std::string_view to_string(PodPhase p) {
  switch (p) {
    case PodPhase::Pending: return "Pending";
    case PodPhase::Running: return "Running";
    case PodPhase::Error: return "Error";
    case PodPhase::CrashLoopBackOff: return "CrashLoopBackOff";
  }
  return "Unknown";
}

inline std::string_view to_string(PvcStatus s) { return s == PvcStatus::Bound ? "Bound" : "Pending"; }

struct Node {
  std::string name;
  bool schedulable = true;
  bool healthy = true;
  int capacity = 0;  // max pods; 0 means unbounded

  friend bool operator==(const Node&, const Node&) = default;
};

struct Deployment {
  std::string name;
  std::string ns;
  int replicas = 1;
  std::string image;
  std::string container;  // container name, defaults to the deployment name
  int container_port = 8080;
  std::optional<std::string> node_selector;
  std::vector<std::string> pvc_refs;
  int restart_generation = 0;  // bumped by rollout restart; not part of canonical equality

  const std::string& container_name() const { return container.empty() ? name : container; }
  friend bool operator==(const Deployment&, const Deployment&) = default;
};

struct Pod {
  std::string name;
  std::string owner;  // owning deployment
  std::string ns;
  int ordinal = 0;
  PodPhase phase = PodPhase::Pending;
  int restarts = 0;
  std::optional<std::string> node;
  std::string template_hash;
  bool killed = false;  // transient fault marker, cleared when the pod is recreated

  friend bool operator==(const Pod&, const Pod&) = default;
};

struct Service {
  std::string name;
  std::string ns;
  int port = 80;
  int target_port = 8080;
  std::string selector;  // deployment name

  friend bool operator==(const Service&, const Service&) = default;
};

struct Pvc {
  std::string name;
  std::string ns;
  std::string storage_class;
  PvcStatus status = PvcStatus::Pending;

  friend bool operator==(const Pvc&, const Pvc&) = default;
};

struct StorageClass {
  std::string name;
  std::string provisioner;
  std::string binding_mode = "Immediate";
  std::string reclaim_policy = "Delete";

  friend bool operator==(const StorageClass&, const StorageClass&) = default;
};

// A command pattern whose execution takes the cluster down.
struct CrashTransition {
  std::string verb;
  std::string kind;
  std::string name;

  friend bool operator==(const CrashTransition&, const CrashTransition&) = default;
};

struct RequestType {
  std::string name;
  int weight = 1;
  std::vector<std::string> path;  // service names, entry first

  friend bool operator==(const RequestType&, const RequestType&) = default;
};

// Scenario-level facts the cluster obeys but no command can change.
struct ClusterRules {
  std::string default_namespace = "default";
  // deployment -> images that start successfully; absent entry means any image works
  std::map<std::string, std::vector<std::string>> accepted_images;
  // installed volume provisioners; empty means every provisioner works
  std::set<std::string> provisioners;
  std::vector<CrashTransition> crashing;
  std::vector<RequestType> request_mix;
  // "ns/deployment#ordinal" slots whose pods always come up killed
  std::set<std::string> persistent_kills;

  bool image_ok(const std::string& deployment, const std::string& image) const {
    auto it = accepted_images.find(deployment);
    if (it == accepted_images.end()) return true;
    return std::find(it->second.begin(), it->second.end(), image) != it->second.end();
  }
  bool provisioner_ok(const std::string& p) const { return provisioners.empty() || provisioners.count(p) > 0; }

  friend bool operator==(const ClusterRules&, const ClusterRules&) = default;
};

struct ClusterState {
  bool crashed = false;
  std::vector<Node> nodes;
  std::set<std::string> namespaces;
  std::vector<Deployment> deployments;
  std::vector<Pod> pods;
  std::vector<Service> services;
  std::vector<Pvc> pvcs;
  std::vector<StorageClass> storage_classes;
  std::uint64_t pod_serial = 0;  // name generator; not part of canonical equality
  std::shared_ptr<const ClusterRules> rules = std::make_shared<const ClusterRules>();

  const ClusterRules& rule_set() const { return *rules; }

  template <typename T>
  static T* find_in(std::vector<T>& v, std::string_view ns, std::string_view name) {
    for (auto& x : v)
      if (x.name == name && x.ns == ns) return &x;
    return nullptr;
  }
  template <typename T>
  static const T* find_in(const std::vector<T>& v, std::string_view ns, std::string_view name) {
    for (const auto& x : v)
      if (x.name == name && x.ns == ns) return &x;
    return nullptr;
  }

  Deployment* deployment(std::string_view ns, std::string_view name) { return find_in(deployments, ns, name); }
  const Deployment* deployment(std::string_view ns, std::string_view name) const { return find_in(deployments, ns, name); }
  Service* service(std::string_view ns, std::string_view name) { return find_in(services, ns, name); }
  const Service* service(std::string_view ns, std::string_view name) const { return find_in(services, ns, name); }
  Pvc* pvc(std::string_view ns, std::string_view name) { return find_in(pvcs, ns, name); }
  const Pvc* pvc(std::string_view ns, std::string_view name) const { return find_in(pvcs, ns, name); }
  Pod* pod(std::string_view ns, std::string_view name) { return find_in(pods, ns, name); }
  const Pod* pod(std::string_view ns, std::string_view name) const { return find_in(pods, ns, name); }

  Node* node(std::string_view name) {
    for (auto& n : nodes)
      if (n.name == name) return &n;
    return nullptr;
  }
  const Node* node(std::string_view name) const {
    for (const auto& n : nodes)
      if (n.name == name) return &n;
    return nullptr;
  }
  StorageClass* storage_class(std::string_view name) {
    for (auto& s : storage_classes)
      if (s.name == name) return &s;
    return nullptr;
  }
  const StorageClass* storage_class(std::string_view name) const {
    for (const auto& s : storage_classes)
      if (s.name == name) return &s;
    return nullptr;
  }

  std::vector<const Pod*> pods_of(std::string_view ns, std::string_view deployment) const {
    std::vector<const Pod*> out;
    for (const auto& p : pods)
      if (p.owner == deployment && p.ns == ns) out.push_back(&p);
    return out;
  }

  // Sorts every collection by its key. Mutating operations call this so that
  // iteration order never depends on edit history.
  void canonicalize() {
    std::sort(nodes.begin(), nodes.end(), [](auto& a, auto& b) { return a.name < b.name; });
    auto by_ns_name = [](auto& a, auto& b) { return std::tie(a.ns, a.name) < std::tie(b.ns, b.name); };
    std::sort(deployments.begin(), deployments.end(), by_ns_name);
    std::sort(services.begin(), services.end(), by_ns_name);
    std::sort(pvcs.begin(), pvcs.end(), by_ns_name);
    std::sort(storage_classes.begin(), storage_classes.end(), [](auto& a, auto& b) { return a.name < b.name; });
    std::sort(pods.begin(), pods.end(),
              [](auto& a, auto& b) { return std::tie(a.ns, a.owner, a.ordinal) < std::tie(b.ns, b.owner, b.ordinal); });
  }
};

namespace detail {

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string base36(std::uint64_t v, std::size_t width) {
  static constexpr char digits[] = "bcdfghjklmnpqrstvwxz2456789";  // kube-style alphabet
  std::string out;
  for (std::size_t i = 0; i < width; ++i) {
    out.push_back(digits[v % (sizeof(digits) - 1)]);
    v /= sizeof(digits) - 1;
  }
  return out;
}

struct CanonicalPod {
  std::string ns, owner;
  int ordinal;
  PodPhase phase;
  std::optional<std::string> node;
  bool killed;
  friend bool operator==(const CanonicalPod&, const CanonicalPod&) = default;
  friend auto operator<=>(const CanonicalPod& a, const CanonicalPod& b) {
    return std::tie(a.ns, a.owner, a.ordinal) <=> std::tie(b.ns, b.owner, b.ordinal);
  }
};

}  // namespace detail

inline std::string pod_template_hash(const Deployment& d) {
  std::string key = d.image + "|" + std::to_string(d.container_port) + "|" + d.node_selector.value_or("") + "|" +
                    std::to_string(d.restart_generation);
  for (const auto& p : d.pvc_refs) key += "|" + p;
  return detail::base36(detail::fnv1a(key), 10);
}

// Structural equality after canonical ordering. Generated pod names, restart
// counters, rollout generations and the name serial are runtime bookkeeping and
// are ignored; pods are matched by (namespace, owner, ordinal).
inline bool deep_equal(const ClusterState& a, const ClusterState& b) {
  if (a.crashed != b.crashed) return false;
  if (a.rules != b.rules && !(*a.rules == *b.rules)) return false;
  if (a.namespaces != b.namespaces) return false;

  auto sorted = [](auto v, auto key) {
    std::sort(v.begin(), v.end(), [&](const auto& x, const auto& y) { return key(x) < key(y); });
    return v;
  };
  auto name_key = [](const auto& x) { return x.name; };
  auto ns_key = [](const auto& x) { return std::make_pair(x.ns, x.name); };

  if (sorted(a.nodes, name_key) != sorted(b.nodes, name_key)) return false;
  if (sorted(a.storage_classes, name_key) != sorted(b.storage_classes, name_key)) return false;
  if (sorted(a.services, ns_key) != sorted(b.services, ns_key)) return false;
  if (sorted(a.pvcs, ns_key) != sorted(b.pvcs, ns_key)) return false;

  auto strip = [](std::vector<Deployment> v) {
    for (auto& d : v) d.restart_generation = 0;
    return v;
  };
  if (sorted(strip(a.deployments), ns_key) != sorted(strip(b.deployments), ns_key)) return false;

  auto project = [](const std::vector<Pod>& v) {
    std::vector<detail::CanonicalPod> out;
    out.reserve(v.size());
    for (const auto& p : v) out.push_back({p.ns, p.owner, p.ordinal, p.phase, p.node, p.killed});
    std::sort(out.begin(), out.end());
    return out;
  };
  return project(a.pods) == project(b.pods);
}

// Immutable value copy of a state.
class Snapshot {
 public:
  Snapshot() = default;
  explicit Snapshot(const ClusterState& s) : state_(std::make_shared<const ClusterState>(s)) {}

  const ClusterState& state() const { return *state_; }
  ClusterState restore() const { return *state_; }
  bool empty() const { return state_ == nullptr; }

 private:
  std::shared_ptr<const ClusterState> state_;
};

inline Snapshot snapshot(const ClusterState& s) { return Snapshot(s); }
inline ClusterState restore(const Snapshot& snap) { return snap.restore(); }

}  // namespace tnr
