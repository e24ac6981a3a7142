#pragma once

// The write transition relation: state x write command -> state | crash | error.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <string>

#include "tnr/command.hpp"
#include "tnr/expected.hpp"
#include "tnr/reconcile.hpp"

namespace tnr {

enum class WriteErrorCode {
  UnknownTarget,
  ImmutableFieldConflict,
  AlreadyExists,
  Invalid,
  ClusterUnavailable,
};

inline std::string_view to_string(WriteErrorCode c) {
  switch (c) {
    case WriteErrorCode::UnknownTarget: return "UnknownTarget";
    case WriteErrorCode::ImmutableFieldConflict: return "ImmutableFieldConflict";
    case WriteErrorCode::AlreadyExists: return "AlreadyExists";
    case WriteErrorCode::Invalid: return "Invalid";
    case WriteErrorCode::ClusterUnavailable: return "ClusterUnavailable";
  }
  return "?";
}

struct WriteError {
  WriteErrorCode code;
  std::string message;
};

struct WriteResult {
  ClusterState state;  // reconciled successor; crashed=true for declared crashing transitions
  std::string output;  // kubectl-style confirmation
};

enum class WriteMode { Normal, Recover };

namespace detail {

inline std::string api_name(const std::string& kind) {
  if (kind == "deployment") return "deployment.apps";
  if (kind == "storageclass") return "storageclass.storage.k8s.io";
  if (kind == "pvc") return "persistentvolumeclaim";
  return kind;
}

inline std::string plural(const std::string& kind) {
  if (kind == "deployment") return "deployments.apps";
  if (kind == "storageclass") return "storageclasses.storage.k8s.io";
  if (kind == "pvc") return "persistentvolumeclaims";
  return kind + "s";
}

inline WriteError not_found(const std::string& kind, const std::string& name) {
  return {WriteErrorCode::UnknownTarget,
          "Error from server (NotFound): " + plural(kind) + " \"" + name + "\" not found"};
}

inline bool namespaced(const std::string& kind) { return kind != "storageclass" && kind != "node" && kind != "namespace"; }

inline std::string resolve_ns(const ClusterState& s, const Command& c) {
  if (c.ns) return *c.ns;
  if (c.manifest) {
    auto m = manifest_namespace(*c.manifest);
    if (!m.empty()) return m;
  }
  return s.rule_set().default_namespace;
}

inline std::optional<int> parse_nonneg(const std::string& v) {
  if (v.empty() || v.size() > 9 || !std::all_of(v.begin(), v.end(), ::isdigit)) return std::nullopt;
  return std::stoi(v);
}

using WriteOutcome = Expected<std::string, WriteError>;

inline WriteOutcome upsert(ClusterState& s, Manifest m, const std::string& ns, bool create_only) {
  const std::string kind = manifest_kind(m);
  const std::string name = manifest_name(m);
  if (namespaced(kind)) {
    set_manifest_namespace(m, ns);
    if (!s.namespaces.count(ns))
      return unexpected(WriteError{WriteErrorCode::UnknownTarget,
                                   "Error from server (NotFound): namespaces \"" + ns + "\" not found"});
  }
  const std::string label = api_name(kind) + "/" + name;
  auto exists_err = [&] {
    return unexpected(
        WriteError{WriteErrorCode::AlreadyExists,
                   "Error from server (AlreadyExists): " + plural(kind) + " \"" + name + "\" already exists"});
  };

  if (auto* sc = std::get_if<StorageClass>(&m)) {
    if (auto* cur = s.storage_class(name)) {
      if (create_only) return exists_err();
      std::string problems;
      if (cur->provisioner != sc->provisioner) problems += "\n* provisioner: Forbidden: updates to provisioner are forbidden.";
      if (cur->binding_mode != sc->binding_mode)
        problems += "\n* volumeBindingMode: Invalid value: \"" + sc->binding_mode + "\": field is immutable";
      if (cur->reclaim_policy != sc->reclaim_policy)
        problems += "\n* reclaimPolicy: Invalid value: \"" + sc->reclaim_policy + "\": field is immutable";
      if (!problems.empty())
        return unexpected(WriteError{WriteErrorCode::ImmutableFieldConflict,
                                     "The StorageClass \"" + name + "\" is invalid: " + problems});
      return label + " unchanged";
    }
    s.storage_classes.push_back(*sc);
    return label + " created";
  }
  if (auto* p = std::get_if<Pvc>(&m)) {
    if (auto* cur = s.pvc(ns, name)) {
      if (create_only) return exists_err();
      if (cur->storage_class != p->storage_class)
        return unexpected(WriteError{WriteErrorCode::ImmutableFieldConflict,
                                     "The PersistentVolumeClaim \"" + name +
                                         "\" is invalid: spec: Forbidden: spec is immutable after creation"});
      return label + " unchanged";
    }
    s.pvcs.push_back(*p);
    return label + " created";
  }
  if (auto* d = std::get_if<Deployment>(&m)) {
    if (auto* cur = s.deployment(ns, name)) {
      if (create_only) return exists_err();
      Deployment next = *d;
      next.restart_generation = cur->restart_generation;
      if (next == *cur) return label + " unchanged";
      *cur = next;
      return label + " configured";
    }
    s.deployments.push_back(*d);
    return label + " created";
  }
  if (auto* sv = std::get_if<Service>(&m)) {
    if (auto* cur = s.service(ns, name)) {
      if (create_only) return exists_err();
      if (*cur == *sv) return label + " unchanged";
      *cur = *sv;
      return label + " configured";
    }
    s.services.push_back(*sv);
    return label + " created";
  }
  const auto& n = std::get<Node>(m);
  if (auto* cur = s.node(name)) {
    if (create_only) return exists_err();
    if (*cur == n) return label + " unchanged";
    *cur = n;
    return label + " configured";
  }
  s.nodes.push_back(n);
  return label + " created";
}

inline WriteOutcome do_delete(ClusterState& s, const Command& c, const std::string& ns) {
  if (!c.name) return unexpected(WriteError{WriteErrorCode::Invalid, "error: resource name is required"});
  const auto& name = *c.name;
  auto erase = [&](auto& vec, auto pred) {
    auto it = std::find_if(vec.begin(), vec.end(), pred);
    if (it == vec.end()) return false;
    vec.erase(it);
    return true;
  };
  bool ok = false;
  if (c.kind == "pod")
    ok = erase(s.pods, [&](const Pod& p) { return p.name == name && p.ns == ns; });
  else if (c.kind == "deployment")
    ok = erase(s.deployments, [&](const Deployment& d) { return d.name == name && d.ns == ns; });
  else if (c.kind == "service")
    ok = erase(s.services, [&](const Service& d) { return d.name == name && d.ns == ns; });
  else if (c.kind == "pvc")
    ok = erase(s.pvcs, [&](const Pvc& d) { return d.name == name && d.ns == ns; });
  else if (c.kind == "storageclass")
    ok = erase(s.storage_classes, [&](const StorageClass& d) { return d.name == name; });
  else if (c.kind == "node")
    ok = erase(s.nodes, [&](const Node& d) { return d.name == name; });
  else
    return unexpected(WriteError{WriteErrorCode::Invalid,
                                 "error: the server doesn't have a resource type \"" + c.kind + "\""});
  if (!ok) return unexpected(not_found(c.kind, name));
  return api_name(c.kind) + " \"" + name + "\" deleted";
}

inline WriteOutcome do_patch(ClusterState& s, const Command& c, const std::string& ns) {
  if (!c.name) return unexpected(WriteError{WriteErrorCode::Invalid, "error: resource name is required"});
  auto body = c.flag_value({"-p", "--patch"});
  if (!body) return unexpected(WriteError{WriteErrorCode::Invalid, "error: must specify -p to patch"});
  if (auto t = c.flag_value({"--type"}); t && *t == "json")
    return unexpected(WriteError{WriteErrorCode::Invalid, "error: --type=json patches are not supported"});
  nlohmann::json p;
  try {
    p = nlohmann::json::parse(*body);
  } catch (const nlohmann::json::exception&) {
    return unexpected(WriteError{WriteErrorCode::Invalid, "error: unable to parse \"" + *body + "\": invalid JSON"});
  }
  if (!p.is_object()) return unexpected(WriteError{WriteErrorCode::Invalid, "error: patch must be a JSON object"});
  const std::string label = api_name(c.kind) + "/" + *c.name;
  auto unsupported = [&](const std::string& path) {
    return unexpected(WriteError{WriteErrorCode::Invalid, "error: unsupported patch field: " + path});
  };
  auto bad_value = [&](const std::string& path) {
    return unexpected(WriteError{WriteErrorCode::Invalid, "error: invalid value for " + path});
  };
  auto only_keys = [](const nlohmann::json& o, std::initializer_list<const char*> keys) -> std::optional<std::string> {
    if (!o.is_object()) return std::string("<non-object>");
    for (auto it = o.begin(); it != o.end(); ++it)
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; })) return it.key();
    return std::nullopt;
  };

  if (c.kind == "deployment") {
    auto* d = s.deployment(ns, *c.name);
    if (!d) return unexpected(not_found(c.kind, *c.name));
    Deployment next = *d;
    if (auto k = only_keys(p, {"spec"})) return unsupported(*k);
    const auto& spec = p["spec"];
    if (auto k = only_keys(spec, {"replicas", "template"})) return unsupported("spec." + *k);
    if (spec.contains("replicas")) {
      if (!spec["replicas"].is_number_integer() || spec["replicas"].get<int>() < 0) return bad_value("spec.replicas");
      next.replicas = spec["replicas"].get<int>();
    }
    if (spec.contains("template")) {
      if (auto k = only_keys(spec["template"], {"spec"})) return unsupported("spec.template." + *k);
      const auto& ps = spec["template"]["spec"];
      if (auto k = only_keys(ps, {"containers", "nodeSelector"})) return unsupported("spec.template.spec." + *k);
      if (ps.contains("nodeSelector")) {
        const auto& sel = ps["nodeSelector"];
        if (sel.is_null()) {
          next.node_selector.reset();
        } else if (sel.is_object() && sel.size() == 1 && sel.contains("kubernetes.io/hostname") &&
                   sel["kubernetes.io/hostname"].is_string()) {
          next.node_selector = sel["kubernetes.io/hostname"].get<std::string>();
        } else if (sel.is_object() && sel.contains("kubernetes.io/hostname") && sel["kubernetes.io/hostname"].is_null()) {
          next.node_selector.reset();
        } else {
          return bad_value("spec.template.spec.nodeSelector");
        }
      }
      if (ps.contains("containers")) {
        const auto& cs = ps["containers"];
        if (!cs.is_array() || cs.size() != 1) return bad_value("spec.template.spec.containers");
        const auto& ct = cs[0];
        if (auto k = only_keys(ct, {"name", "image", "ports"})) return unsupported("containers[0]." + *k);
        if (ct.contains("name") && ct["name"] != d->container_name())
          return unexpected(WriteError{WriteErrorCode::Invalid,
                                       "error: container \"" + ct["name"].get<std::string>() + "\" not found"});
        if (ct.contains("image")) {
          if (!ct["image"].is_string() || ct["image"].get<std::string>().empty()) return bad_value("image");
          next.image = ct["image"].get<std::string>();
        }
        if (ct.contains("ports")) {
          const auto& ports = ct["ports"];
          if (!ports.is_array() || ports.size() != 1 || !ports[0].contains("containerPort") ||
              !ports[0]["containerPort"].is_number_integer())
            return bad_value("containers[0].ports");
          next.container_port = ports[0]["containerPort"].get<int>();
        }
      }
    }
    if (next == *d) return label + " patched (no change)";
    *d = next;
    return label + " patched";
  }
  if (c.kind == "service") {
    auto* sv = s.service(ns, *c.name);
    if (!sv) return unexpected(not_found(c.kind, *c.name));
    Service next = *sv;
    if (auto k = only_keys(p, {"spec"})) return unsupported(*k);
    const auto& spec = p["spec"];
    if (auto k = only_keys(spec, {"ports", "selector"})) return unsupported("spec." + *k);
    if (spec.contains("ports")) {
      const auto& ports = spec["ports"];
      if (!ports.is_array() || ports.size() != 1) return bad_value("spec.ports");
      if (auto k = only_keys(ports[0], {"port", "targetPort", "name", "protocol"})) return unsupported("spec.ports[0]." + *k);
      if (ports[0].contains("port")) {
        if (!ports[0]["port"].is_number_integer()) return bad_value("spec.ports[0].port");
        next.port = ports[0]["port"].get<int>();
      }
      if (ports[0].contains("targetPort")) {
        if (!ports[0]["targetPort"].is_number_integer()) return bad_value("spec.ports[0].targetPort");
        next.target_port = ports[0]["targetPort"].get<int>();
      }
    }
    if (spec.contains("selector")) {
      const auto& sel = spec["selector"];
      if (!sel.is_object() || !sel.contains("app") || !sel["app"].is_string()) return bad_value("spec.selector");
      next.selector = sel["app"].get<std::string>();
    }
    if (next == *sv) return label + " patched (no change)";
    *sv = next;
    return label + " patched";
  }
  if (c.kind == "node") {
    auto* n = s.node(*c.name);
    if (!n) return unexpected(not_found(c.kind, *c.name));
    if (auto k = only_keys(p, {"spec"})) return unsupported(*k);
    if (auto k = only_keys(p["spec"], {"unschedulable"})) return unsupported("spec." + *k);
    if (!p["spec"]["unschedulable"].is_boolean()) return bad_value("spec.unschedulable");
    bool sched = !p["spec"]["unschedulable"].get<bool>();
    if (sched == n->schedulable) return label + " patched (no change)";
    n->schedulable = sched;
    return label + " patched";
  }
  if (c.kind == "pvc") {
    auto* v = s.pvc(ns, *c.name);
    if (!v) return unexpected(not_found(c.kind, *c.name));
    if (auto k = only_keys(p, {"spec"})) return unsupported(*k);
    if (auto k = only_keys(p["spec"], {"storageClassName"})) return unsupported("spec." + *k);
    if (p["spec"]["storageClassName"] != v->storage_class)
      return unexpected(WriteError{WriteErrorCode::ImmutableFieldConflict,
                                   "The PersistentVolumeClaim \"" + *c.name +
                                       "\" is invalid: spec: Forbidden: spec is immutable after creation"});
    return label + " patched (no change)";
  }
  if (c.kind == "storageclass") {
    auto* sc = s.storage_class(*c.name);
    if (!sc) return unexpected(not_found(c.kind, *c.name));
    StorageClass next = *sc;
    if (auto k = only_keys(p, {"provisioner", "volumeBindingMode", "reclaimPolicy"})) return unsupported(*k);
    if (p.contains("provisioner")) next.provisioner = p["provisioner"].get<std::string>();
    if (p.contains("volumeBindingMode")) next.binding_mode = p["volumeBindingMode"].get<std::string>();
    if (p.contains("reclaimPolicy")) next.reclaim_policy = p["reclaimPolicy"].get<std::string>();
    Manifest m = next;
    return upsert(s, m, "", false);  // same immutability rules as apply
  }
  return unexpected(WriteError{WriteErrorCode::Invalid,
                               "error: the server doesn't have a resource type \"" + c.kind + "\""});
}

inline WriteOutcome do_create(ClusterState& s, const Command& c, const std::string& ns) {
  if (c.manifest) return upsert(s, *c.manifest, ns, true);
  auto check_flags = [&](std::initializer_list<std::string_view> allowed) -> std::optional<WriteError> {
    for (const auto& f : c.flags) {
      if (f.name == "-n" || f.name == "--namespace" || f.name == "--dry-run" || f.name == "-o" || f.name == "--output")
        continue;
      if (std::find(allowed.begin(), allowed.end(), f.name) == allowed.end())
        return WriteError{WriteErrorCode::Invalid, "error: unknown flag: " + f.name};
    }
    return std::nullopt;
  };
  if (c.kind == "deployment") {
    if (auto e = check_flags({"--image", "--replicas", "--port"})) return unexpected(*e);
    if (!c.name) return unexpected(WriteError{WriteErrorCode::Invalid, "error: exactly one NAME is required"});
    auto image = c.flag_value({"--image"});
    if (!image || image->empty())
      return unexpected(WriteError{WriteErrorCode::Invalid, "error: required flag(s) \"image\" not set"});
    Deployment d;
    d.name = *c.name;
    d.image = *image;
    if (auto r = c.flag_value({"--replicas"})) {
      auto v = parse_nonneg(*r);
      if (!v) return unexpected(WriteError{WriteErrorCode::Invalid, "error: invalid value for --replicas"});
      d.replicas = *v;
    }
    if (auto p = c.flag_value({"--port"})) {
      auto v = parse_nonneg(*p);
      if (!v) return unexpected(WriteError{WriteErrorCode::Invalid, "error: invalid value for --port"});
      d.container_port = *v;
    }
    return upsert(s, d, ns, true);
  }
  // kubectl has no generator for the remaining kinds; flags are rejected first
  if (auto e = check_flags({})) return unexpected(*e);
  return unexpected(WriteError{WriteErrorCode::Invalid,
                               "error: unknown command \"" + c.kind + "\" for \"kubectl create\""});
}

}  // namespace detail

inline bool is_crashing(const ClusterState& s, const Command& c) {
  for (const auto& t : s.rule_set().crashing) {
    if (t.verb == to_string(c.verb) && t.kind == c.kind && c.name && t.name == *c.name) return true;
  }
  return false;
}

// Applies a write command and reconciles. Errors leave the input untouched.
// Recover mode accepts a crashed input and clears the crash; the undo
// executor uses it when reverting the transition that took the cluster down.
inline Expected<WriteResult, WriteError> apply_write(const ClusterState& state, const Command& c,
                                                     WriteMode mode = WriteMode::Normal) {
  if (state.crashed && mode == WriteMode::Normal)
    return unexpected(WriteError{WriteErrorCode::ClusterUnavailable,
                                 "The connection to the server was refused - did you specify the right host or port?"});
  if (classify(c) != CommandClass::Write)
    return unexpected(WriteError{WriteErrorCode::Invalid, "error: not a write command"});

  ClusterState next = state;
  next.crashed = false;
  const std::string ns = detail::resolve_ns(state, c);
  if (detail::namespaced(c.kind) && c.verb != Verb::Cordon && c.verb != Verb::Uncordon && !c.manifest &&
      !state.namespaces.count(ns))
    return unexpected(
        WriteError{WriteErrorCode::UnknownTarget, "Error from server (NotFound): namespaces \"" + ns + "\" not found"});

  detail::WriteOutcome out = std::string{};
  switch (c.verb) {
    case Verb::Apply:
      if (!c.manifest)
        return unexpected(WriteError{WriteErrorCode::Invalid, "error: no objects passed to apply"});
      out = detail::upsert(next, *c.manifest, ns, false);
      break;
    case Verb::Create: out = detail::do_create(next, c, ns); break;
    case Verb::Delete: out = detail::do_delete(next, c, ns); break;
    case Verb::Patch: out = detail::do_patch(next, c, ns); break;
    case Verb::Scale: {
      if (c.kind != "deployment")
        return unexpected(WriteError{WriteErrorCode::Invalid, "error: only deployments can be scaled"});
      auto r = c.flag_value({"--replicas"});
      if (!r) return unexpected(WriteError{WriteErrorCode::Invalid, "error: required flag(s) \"replicas\" not set"});
      auto v = detail::parse_nonneg(*r);
      if (!v) return unexpected(WriteError{WriteErrorCode::Invalid, "error: invalid value for --replicas: " + *r});
      auto* d = c.name ? next.deployment(ns, *c.name) : nullptr;
      if (!d) return unexpected(detail::not_found(c.kind, c.name.value_or("")));
      d->replicas = *v;
      out = "deployment.apps/" + d->name + " scaled";
      break;
    }
    case Verb::Cordon:
    case Verb::Uncordon: {
      auto* n = c.name ? next.node(*c.name) : nullptr;
      if (!n) return unexpected(detail::not_found("node", c.name.value_or("")));
      bool target = c.verb == Verb::Uncordon;
      const char* word = target ? "uncordoned" : "cordoned";
      out = std::string("node/") + n->name + (n->schedulable == target ? " already " : " ") + word;
      n->schedulable = target;
      break;
    }
    case Verb::RolloutRestart: {
      auto* d = c.name && c.kind == "deployment" ? next.deployment(ns, *c.name) : nullptr;
      if (!d) return unexpected(detail::not_found("deployment", c.name.value_or("")));
      ++d->restart_generation;
      out = "deployment.apps/" + d->name + " restarted";
      break;
    }
    default:
      return unexpected(WriteError{WriteErrorCode::Invalid,
                                   "error: " + std::string(to_string(c.verb)) + " is not supported by the simulator"});
  }
  if (!out) return unexpected(out.error());

  next.canonicalize();
  next = reconcile(std::move(next));
  if (mode == WriteMode::Normal && is_crashing(state, c)) next.crashed = true;
  return WriteResult{std::move(next), std::move(out).value()};
}

struct PredictedOutcome {
  bool ok = false;
  std::string message;
};

// Evaluates the write on a copy; the input is never modified.
inline PredictedOutcome dry_run(const ClusterState& state, const Command& c) {
  auto r = apply_write(state, c);
  if (!r) return {false, r.error().message};
  std::string msg = r->output + " (dry run)";
  if (r->state.crashed) msg += "; warning: this change takes the cluster down";
  return {true, msg};
}

}  // namespace tnr
