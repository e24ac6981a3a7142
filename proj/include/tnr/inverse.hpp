#pragma once

// Inverse synthesis for undo. An inverse is computed against the state in
// which the original command runs.

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "tnr/lint.hpp"
#include "tnr/transition.hpp"

namespace tnr {

struct InverseAction {
  bool noop = false;
  std::optional<Command> command;  // set unless noop
  std::string note;                // why a no-op suffices

  std::string text() const { return noop ? "no-op (" + note + ")" : command->text; }
};

struct NoInverse {
  std::string reason;
};

// Pre-execution copy of whatever the command touches, used to restore the
// resource directly if replaying the inverse ever falls short.
struct ResourceFragment {
  std::string kind;
  std::string ns;
  std::string name;
  std::optional<Manifest> before;  // nullopt: the resource did not exist
  std::vector<Pod> pods_before;    // pods of the affected deployment
};

namespace detail {

inline std::optional<Manifest> current_manifest(const ClusterState& s, const std::string& kind, const std::string& ns,
                                                const std::string& name) {
  if (kind == "deployment") {
    if (const auto* d = s.deployment(ns, name)) return Manifest{*d};
  } else if (kind == "service") {
    if (const auto* v = s.service(ns, name)) return Manifest{*v};
  } else if (kind == "pvc") {
    if (const auto* v = s.pvc(ns, name)) return Manifest{*v};
  } else if (kind == "storageclass") {
    if (const auto* v = s.storage_class(name)) return Manifest{*v};
  } else if (kind == "node") {
    if (const auto* v = s.node(name)) return Manifest{*v};
  }
  return std::nullopt;
}

inline InverseAction noop(std::string note) { return {true, std::nullopt, std::move(note)}; }
inline InverseAction act(const CommandSpec& spec) { return {false, make_command(spec), {}}; }

inline CommandSpec apply_spec(Manifest m) {
  CommandSpec spec{Verb::Apply, manifest_kind(m), manifest_name(m), std::nullopt, {}, std::move(m)};
  return spec;
}

}  // namespace detail

inline Expected<InverseAction, NoInverse> synthesize_inverse(const ClusterState& s, const Command& c) {
  using detail::act;
  using detail::noop;
  if (classify(c) != CommandClass::Write) return noop("read command");
  if (!statically_invertible(c))
    return unexpected(NoInverse{"no undo operator for " + std::string(to_string(c.verb)) + " " + c.kind});

  const std::string ns = detail::resolve_ns(s, c);
  const std::string name = c.name.value_or("");
  auto prior = detail::current_manifest(s, c.kind, ns, name);
  auto del = [&] { return act({Verb::Delete, c.kind, name, ns, {}, std::nullopt}); };

  switch (c.verb) {
    case Verb::Apply:
    case Verb::Create: {
      if (c.verb == Verb::Apply && !c.manifest) return noop("nothing is applied without a manifest");
      if (prior) {
        if (c.verb == Verb::Create) return noop("create fails on an existing resource");
        return act(detail::apply_spec(*prior));
      }
      return del();
    }
    case Verb::Delete: {
      if (c.kind == "pod") return noop("the owning deployment recreates the pod");
      if (!prior) return noop("target absent; nothing to undo");
      return act(detail::apply_spec(*prior));
    }
    case Verb::Scale: {
      const auto* d = s.deployment(ns, name);
      if (!d) return noop("target absent; nothing to undo");
      return act({Verb::Scale, "deployment", name, ns, {{"--replicas", std::to_string(d->replicas)}}, std::nullopt});
    }
    case Verb::Cordon:
    case Verb::Uncordon: {
      const auto* n = s.node(name);
      if (!n) return noop("target absent; nothing to undo");
      return act({n->schedulable ? Verb::Uncordon : Verb::Cordon, "node", name, std::nullopt, {}, std::nullopt});
    }
    case Verb::RolloutRestart: return noop("restarted pods are recreated from the same template");
    case Verb::Patch: {
      if (!prior) return noop("target absent; nothing to undo");
      nlohmann::json p;
      try {
        p = nlohmann::json::parse(c.flag_value({"-p", "--patch"}).value_or("{}"));
      } catch (const nlohmann::json::exception&) {
        return noop("patch body does not parse; the command fails");
      }
      nlohmann::json inv = nlohmann::json::object();
      if (const auto* d = std::get_if<Deployment>(&*prior)) {
        const auto spec = p.value("spec", nlohmann::json::object());
        if (spec.contains("replicas")) inv["spec"]["replicas"] = d->replicas;
        const auto ps = spec.value("template", nlohmann::json::object()).value("spec", nlohmann::json::object());
        if (ps.contains("nodeSelector")) {
          if (d->node_selector)
            inv["spec"]["template"]["spec"]["nodeSelector"]["kubernetes.io/hostname"] = *d->node_selector;
          else
            inv["spec"]["template"]["spec"]["nodeSelector"] = nullptr;
        }
        if (ps.contains("containers") && ps["containers"].is_array() && !ps["containers"].empty()) {
          nlohmann::json ct = nlohmann::json::object();
          const auto& orig = ps["containers"][0];
          if (orig.contains("image")) ct["image"] = d->image;
          if (orig.contains("ports")) ct["ports"] = nlohmann::json::array({{{"containerPort", d->container_port}}});
          inv["spec"]["template"]["spec"]["containers"] = nlohmann::json::array({ct});
        }
      } else if (const auto* sv = std::get_if<Service>(&*prior)) {
        const auto spec = p.value("spec", nlohmann::json::object());
        if (spec.contains("ports") && spec["ports"].is_array() && !spec["ports"].empty()) {
          nlohmann::json port = nlohmann::json::object();
          if (spec["ports"][0].contains("port")) port["port"] = sv->port;
          if (spec["ports"][0].contains("targetPort")) port["targetPort"] = sv->target_port;
          inv["spec"]["ports"] = nlohmann::json::array({port});
        }
        if (spec.contains("selector")) inv["spec"]["selector"]["app"] = sv->selector;
      } else if (const auto* n = std::get_if<Node>(&*prior)) {
        inv["spec"]["unschedulable"] = !n->schedulable;
      } else {
        // storage classes and claims only accept no-op patches
        return act(detail::apply_spec(*prior));
      }
      if (inv.empty()) return noop("patch changes no tracked field");
      return act({Verb::Patch, c.kind, name, ns, {{"--type", "merge"}, {"-p", inv.dump()}}, std::nullopt});
    }
    default: break;
  }
  return unexpected(NoInverse{"no undo operator for " + std::string(to_string(c.verb))});
}

inline ResourceFragment capture_fragment(const ClusterState& s, const Command& c) {
  ResourceFragment f;
  f.ns = detail::resolve_ns(s, c);
  f.kind = c.kind;
  f.name = c.name.value_or("");
  std::string owner;
  if (c.kind == "pod") {
    if (const auto* p = s.pod(f.ns, f.name)) owner = p->owner;
    f.kind = "deployment";
    f.name = owner;
  } else if (c.kind == "deployment") {
    owner = f.name;
  }
  if (!f.name.empty()) f.before = detail::current_manifest(s, f.kind, f.ns, f.name);
  if (!owner.empty())
    for (const auto* p : s.pods_of(f.ns, owner)) f.pods_before.push_back(*p);
  return f;
}

// Puts the fragment's resource back as it was, bypassing admission rules.
inline ClusterState restore_fragment(ClusterState s, const ResourceFragment& f) {
  auto erase_named = [&](auto& vec, bool namespaced) {
    std::erase_if(vec, [&](const auto& x) {
      if constexpr (requires { x.ns; })
        return x.name == f.name && (!namespaced || x.ns == f.ns);
      else
        return x.name == f.name;
    });
  };
  if (f.kind == "deployment") erase_named(s.deployments, true);
  if (f.kind == "service") erase_named(s.services, true);
  if (f.kind == "pvc") erase_named(s.pvcs, true);
  if (f.kind == "storageclass") erase_named(s.storage_classes, false);
  if (f.kind == "node") erase_named(s.nodes, false);
  if (f.before) {
    std::visit(
        [&](const auto& r) {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, Deployment>) s.deployments.push_back(r);
          if constexpr (std::is_same_v<T, Service>) s.services.push_back(r);
          if constexpr (std::is_same_v<T, Pvc>) s.pvcs.push_back(r);
          if constexpr (std::is_same_v<T, StorageClass>) s.storage_classes.push_back(r);
          if constexpr (std::is_same_v<T, Node>) s.nodes.push_back(r);
        },
        *f.before);
  }
  s.canonicalize();
  s = reconcile(std::move(s));
  bool touched = false;
  for (const auto& before : f.pods_before) {
    for (auto& p : s.pods)
      if (p.ns == before.ns && p.owner == before.owner && p.ordinal == before.ordinal && p.killed != before.killed) {
        p.killed = before.killed;
        touched = true;
      }
  }
  return touched ? reconcile(std::move(s)) : s;
}

}  // namespace tnr
