#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tnr/faults.hpp"
#include "tnr/reconcile.hpp"

namespace tnr {

struct ProbeOverrides {
  std::optional<int> transaction_requests;
  std::optional<int> validation_requests;
  std::optional<std::uint64_t> seed;

  friend bool operator==(const ProbeOverrides&, const ProbeOverrides&) = default;
};

struct Scenario {
  std::string id;
  std::string description;
  bool expected_solvable = true;
  std::string playbook;  // path relative to the scenario file
  ClusterState initial;  // before fault injection, reconciled
  std::vector<FaultSpec> faults;
  ProbeOverrides probe;
  std::string source_dir;  // directory the scenario was loaded from

  bool is_noop() const {
    return std::all_of(faults.begin(), faults.end(), [](const FaultSpec& f) { return f.kind == FaultKind::NoOp; });
  }

  // The faulty starting state s_0.
  ClusterState faulted() const {
    ClusterState s = initial;
    for (const auto& f : faults) s = inject_fault(s, f);
    return s;
  }

  std::string playbook_path() const {
    if (playbook.empty()) return {};
    return (std::filesystem::path(source_dir) / playbook).lexically_normal().string();
  }
};

class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string field, const std::string& msg, int line = 0)
      : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                           (field.empty() ? msg : field + ": " + msg)),
        field(std::move(field)),
        line(line) {}
  std::string field;
  int line;
};

namespace detail {

using nlohmann::json;

class SchemaReader {
 public:
  explicit SchemaReader(std::string path) : path_(std::move(path)) {}

  void allow(const json& j, std::initializer_list<const char*> keys) const {
    if (!j.is_object()) fail("expected an object");
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!ok.count(it.key())) SchemaReader(path_ + "." + it.key()).fail("unknown field");
  }

  SchemaReader at(const std::string& key) const { return SchemaReader(path_.empty() ? key : path_ + "." + key); }
  SchemaReader at(std::size_t i) const { return SchemaReader(path_ + "[" + std::to_string(i) + "]"); }

  const json& need(const json& j, const char* key) const {
    if (!j.contains(key)) at(key).fail("missing required field");
    return j[key];
  }

  std::string str(const json& j, const char* key) const {
    const auto& v = need(j, key);
    if (!v.is_string()) at(key).fail("expected a string");
    return v.get<std::string>();
  }
  std::string str_or(const json& j, const char* key, std::string d) const { return j.contains(key) ? str(j, key) : d; }

  int integer(const json& j, const char* key) const {
    const auto& v = need(j, key);
    if (!v.is_number_integer()) at(key).fail("expected an integer");
    auto x = v.get<long long>();
    if (x < 0 || x > 1000000) at(key).fail("out of range");
    return static_cast<int>(x);
  }
  int integer_or(const json& j, const char* key, int d) const { return j.contains(key) ? integer(j, key) : d; }

  bool boolean_or(const json& j, const char* key, bool d) const {
    if (!j.contains(key)) return d;
    if (!j[key].is_boolean()) at(key).fail("expected a boolean");
    return j[key].get<bool>();
  }

  const json& array_or_empty(const json& j, const char* key) const {
    static const json empty = json::array();
    if (!j.contains(key)) return empty;
    if (!j[key].is_array()) at(key).fail("expected an array");
    return j[key];
  }

  std::vector<std::string> strings(const json& j, const char* key) const {
    std::vector<std::string> out;
    const auto& a = array_or_empty(j, key);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!a[i].is_string()) at(key).at(i).fail("expected a string");
      out.push_back(a[i].get<std::string>());
    }
    return out;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw SchemaError(path_, msg); }

 private:
  std::string path_;
};

inline int line_of(const std::string& text, std::size_t byte) {
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(std::min(byte, text.size())), '\n'));
}

}  // namespace detail

inline Scenario scenario_from_json(const nlohmann::json& j) {
  using detail::SchemaReader;
  SchemaReader r("");
  r.allow(j, {"id", "description", "namespace", "namespaces", "expected_solvable", "playbook", "nodes", "deployments",
              "services", "pvcs", "storage_classes", "accepted_images", "provisioners", "request_mix", "crashing",
              "faults", "probe"});
  Scenario sc;
  sc.id = r.str(j, "id");
  if (sc.id.empty()) r.at("id").fail("must not be empty");
  sc.description = r.str_or(j, "description", "");
  sc.expected_solvable = r.boolean_or(j, "expected_solvable", true);
  sc.playbook = r.str_or(j, "playbook", "");

  auto rules = std::make_shared<ClusterRules>();
  rules->default_namespace = r.str_or(j, "namespace", "default");
  ClusterState& s = sc.initial;
  s.namespaces.insert(rules->default_namespace);
  for (const auto& n : r.strings(j, "namespaces")) s.namespaces.insert(n);

  const auto& nodes = r.array_or_empty(j, "nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto at = r.at("nodes").at(i);
    at.allow(nodes[i], {"name", "schedulable", "healthy", "capacity"});
    s.nodes.push_back({at.str(nodes[i], "name"), at.boolean_or(nodes[i], "schedulable", true),
                       at.boolean_or(nodes[i], "healthy", true), at.integer_or(nodes[i], "capacity", 0)});
  }
  const auto& deps = r.array_or_empty(j, "deployments");
  for (std::size_t i = 0; i < deps.size(); ++i) {
    auto at = r.at("deployments").at(i);
    const auto& d = deps[i];
    at.allow(d, {"name", "namespace", "replicas", "image", "container", "container_port", "node_selector", "pvc_refs"});
    Deployment dep;
    dep.name = at.str(d, "name");
    dep.ns = at.str_or(d, "namespace", rules->default_namespace);
    dep.replicas = at.integer(d, "replicas");
    dep.image = at.str(d, "image");
    dep.container = at.str_or(d, "container", "");
    if (dep.container == dep.name) dep.container.clear();
    dep.container_port = at.integer_or(d, "container_port", 8080);
    if (d.contains("node_selector")) dep.node_selector = at.str(d, "node_selector");
    dep.pvc_refs = at.strings(d, "pvc_refs");
    s.namespaces.insert(dep.ns);
    s.deployments.push_back(std::move(dep));
  }
  const auto& svcs = r.array_or_empty(j, "services");
  for (std::size_t i = 0; i < svcs.size(); ++i) {
    auto at = r.at("services").at(i);
    const auto& v = svcs[i];
    at.allow(v, {"name", "namespace", "port", "target_port", "selector"});
    Service svc{at.str(v, "name"), at.str_or(v, "namespace", rules->default_namespace), at.integer(v, "port"),
                at.integer(v, "target_port"), at.str(v, "selector")};
    s.namespaces.insert(svc.ns);
    s.services.push_back(std::move(svc));
  }
  const auto& pvcs = r.array_or_empty(j, "pvcs");
  for (std::size_t i = 0; i < pvcs.size(); ++i) {
    auto at = r.at("pvcs").at(i);
    const auto& v = pvcs[i];
    at.allow(v, {"name", "namespace", "storage_class"});
    Pvc c{at.str(v, "name"), at.str_or(v, "namespace", rules->default_namespace), at.str(v, "storage_class"),
          PvcStatus::Pending};
    s.namespaces.insert(c.ns);
    s.pvcs.push_back(std::move(c));
  }
  const auto& scs = r.array_or_empty(j, "storage_classes");
  for (std::size_t i = 0; i < scs.size(); ++i) {
    auto at = r.at("storage_classes").at(i);
    const auto& v = scs[i];
    at.allow(v, {"name", "provisioner", "binding_mode", "reclaim_policy"});
    s.storage_classes.push_back({at.str(v, "name"), at.str(v, "provisioner"),
                                 at.str_or(v, "binding_mode", "Immediate"), at.str_or(v, "reclaim_policy", "Delete")});
  }
  if (j.contains("accepted_images")) {
    const auto& ai = j["accepted_images"];
    auto at = r.at("accepted_images");
    if (!ai.is_object()) at.fail("expected an object");
    for (auto it = ai.begin(); it != ai.end(); ++it) rules->accepted_images[it.key()] = at.strings(ai, it.key().c_str());
  }
  for (const auto& p : r.strings(j, "provisioners")) rules->provisioners.insert(p);
  const auto& mix = r.array_or_empty(j, "request_mix");
  for (std::size_t i = 0; i < mix.size(); ++i) {
    auto at = r.at("request_mix").at(i);
    at.allow(mix[i], {"name", "weight", "path"});
    rules->request_mix.push_back({at.str(mix[i], "name"), at.integer_or(mix[i], "weight", 1), at.strings(mix[i], "path")});
  }
  const auto& crash = r.array_or_empty(j, "crashing");
  for (std::size_t i = 0; i < crash.size(); ++i) {
    auto at = r.at("crashing").at(i);
    at.allow(crash[i], {"verb", "kind", "name"});
    rules->crashing.push_back({at.str(crash[i], "verb"), at.str(crash[i], "kind"), at.str(crash[i], "name")});
  }
  const auto& faults = r.array_or_empty(j, "faults");
  for (std::size_t i = 0; i < faults.size(); ++i) {
    auto at = r.at("faults").at(i);
    const auto& f = faults[i];
    at.allow(f, {"kind", "target", "params", "persistent"});
    FaultSpec spec;
    auto kind = fault_kind_from(at.str(f, "kind"));
    if (!kind) at.at("kind").fail("unknown fault kind");
    spec.kind = *kind;
    spec.target = at.str_or(f, "target", "");
    if (f.contains("params")) {
      if (!f["params"].is_object()) at.at("params").fail("expected an object");
      for (auto it = f["params"].begin(); it != f["params"].end(); ++it) {
        if (!it.value().is_string()) at.at("params").at(it.key()).fail("expected a string");
        spec.params[it.key()] = it.value().get<std::string>();
      }
    }
    spec.persistent = at.boolean_or(f, "persistent", true);
    sc.faults.push_back(std::move(spec));
  }
  if (j.contains("probe")) {
    auto at = r.at("probe");
    const auto& p = j["probe"];
    at.allow(p, {"transaction_requests", "validation_requests", "seed"});
    if (p.contains("transaction_requests")) sc.probe.transaction_requests = at.integer(p, "transaction_requests");
    if (p.contains("validation_requests")) sc.probe.validation_requests = at.integer(p, "validation_requests");
    if (p.contains("seed")) sc.probe.seed = static_cast<std::uint64_t>(at.integer(p, "seed"));
  }

  // referential checks
  for (std::size_t i = 0; i < s.deployments.size(); ++i)
    for (const auto& ref : s.deployments[i].pvc_refs)
      if (!s.pvc(s.deployments[i].ns, ref)) r.at("deployments").at(i).at("pvc_refs").fail("unknown claim " + ref);
  for (std::size_t i = 0; i < s.services.size(); ++i)
    if (!s.deployment(s.services[i].ns, s.services[i].selector))
      r.at("services").at(i).at("selector").fail("unknown deployment " + s.services[i].selector);

  s.rules = std::move(rules);
  s.canonicalize();
  s = reconcile(std::move(s));
  try {
    (void)sc.faulted();
  } catch (const InvalidTarget& e) {
    r.at("faults").fail(e.what());
  }
  return sc;
}

// Canonical document: keys sorted, defaults explicit, optional fields only
// when set. serialize(load(x)) == x for any canonical x.
inline nlohmann::json scenario_to_json(const Scenario& sc) {
  using nlohmann::json;
  const auto& s = sc.initial;
  const auto& rules = s.rule_set();
  json j;
  j["id"] = sc.id;
  j["description"] = sc.description;
  j["namespace"] = rules.default_namespace;
  j["namespaces"] = std::vector<std::string>(s.namespaces.begin(), s.namespaces.end());
  j["expected_solvable"] = sc.expected_solvable;
  j["playbook"] = sc.playbook;
  j["nodes"] = json::array();
  for (const auto& n : s.nodes)
    j["nodes"].push_back({{"name", n.name}, {"schedulable", n.schedulable}, {"healthy", n.healthy}, {"capacity", n.capacity}});
  j["deployments"] = json::array();
  for (const auto& d : s.deployments) {
    json jd = {{"name", d.name},   {"namespace", d.ns},
               {"replicas", d.replicas}, {"image", d.image},
               {"container_port", d.container_port}, {"pvc_refs", d.pvc_refs}};
    if (!d.container.empty()) jd["container"] = d.container;
    if (d.node_selector) jd["node_selector"] = *d.node_selector;
    j["deployments"].push_back(std::move(jd));
  }
  j["services"] = json::array();
  for (const auto& v : s.services)
    j["services"].push_back({{"name", v.name},
                             {"namespace", v.ns},
                             {"port", v.port},
                             {"target_port", v.target_port},
                             {"selector", v.selector}});
  j["pvcs"] = json::array();
  for (const auto& c : s.pvcs)
    j["pvcs"].push_back({{"name", c.name}, {"namespace", c.ns}, {"storage_class", c.storage_class}});
  j["storage_classes"] = json::array();
  for (const auto& c : s.storage_classes)
    j["storage_classes"].push_back({{"name", c.name},
                                    {"provisioner", c.provisioner},
                                    {"binding_mode", c.binding_mode},
                                    {"reclaim_policy", c.reclaim_policy}});
  j["accepted_images"] = json::object();
  for (const auto& [k, v] : rules.accepted_images) j["accepted_images"][k] = v;
  j["provisioners"] = std::vector<std::string>(rules.provisioners.begin(), rules.provisioners.end());
  j["request_mix"] = json::array();
  for (const auto& t : rules.request_mix)
    j["request_mix"].push_back({{"name", t.name}, {"weight", t.weight}, {"path", t.path}});
  j["crashing"] = json::array();
  for (const auto& c : rules.crashing) j["crashing"].push_back({{"verb", c.verb}, {"kind", c.kind}, {"name", c.name}});
  j["faults"] = json::array();
  for (const auto& f : sc.faults) {
    json jf = {{"kind", std::string(to_string(f.kind))}, {"target", f.target}, {"persistent", f.persistent},
               {"params", json::object()}};
    for (const auto& [k, v] : f.params) jf["params"][k] = v;
    j["faults"].push_back(std::move(jf));
  }
  if (sc.probe.transaction_requests || sc.probe.validation_requests || sc.probe.seed) {
    json p = json::object();
    if (sc.probe.transaction_requests) p["transaction_requests"] = *sc.probe.transaction_requests;
    if (sc.probe.validation_requests) p["validation_requests"] = *sc.probe.validation_requests;
    if (sc.probe.seed) p["seed"] = *sc.probe.seed;
    j["probe"] = p;
  }
  return j;
}

inline std::string serialize_scenario(const Scenario& sc) { return scenario_to_json(sc).dump(2) + "\n"; }

inline Scenario parse_scenario(const std::string& text, const std::string& source_dir = ".") {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("", e.what(), detail::line_of(text, e.byte));
  }
  Scenario sc = scenario_from_json(j);
  sc.source_dir = source_dir;
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), std::filesystem::path(path).parent_path().string());
}

// Scenario files in a directory, sorted by file name.
inline std::vector<std::string> scenario_files(const std::string& dir) {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace tnr
