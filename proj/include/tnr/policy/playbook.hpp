#pragma once

#include <nlohmann/json.hpp>

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tnr/policy/policy.hpp"

namespace tnr {

struct Evidence {
  std::optional<std::string> alert_contains;
  std::optional<std::string> suspect_service;
  std::optional<std::string> suspect_operation;
  std::optional<std::string> log_contains;
  std::optional<std::string> issue_contains;
};

struct PlaybookEntry {
  Evidence evidence;
  std::vector<MitigationPlan> attempts;  // indexed by round
};

struct Playbook {
  std::string id;
  std::vector<PlaybookEntry> entries;
};

class PlaybookError : public std::runtime_error {
 public:
  PlaybookError(std::string field, const std::string& msg) : std::runtime_error(field + ": " + msg), field(std::move(field)) {}
  std::string field;
};

inline bool matches(const Evidence& e, const ObservationBundle& o) {
  auto any_contains = [](const auto& range, const std::string& needle) {
    for (const auto& s : range)
      if (s.find(needle) != std::string::npos) return true;
    return false;
  };
  if (e.alert_contains && !any_contains(o.alerts, *e.alert_contains)) return false;
  if (e.suspect_service || e.suspect_operation) {
    bool hit = false;
    for (const auto& s : o.suspects)
      hit = hit || ((!e.suspect_service || s.service == *e.suspect_service) &&
                    (!e.suspect_operation || s.operation == *e.suspect_operation));
    if (!hit) return false;
  }
  if (e.log_contains) {
    bool hit = false;
    for (const auto& [svc, lines] : o.logs) hit = hit || any_contains(lines, *e.log_contains);
    if (!hit) return false;
  }
  if (e.issue_contains && (!o.reflection || !any_contains(o.reflection->issues, *e.issue_contains))) return false;
  return true;
}

namespace detail {

inline void only_fields(const nlohmann::json& j, const std::string& where, std::set<std::string> allowed) {
  if (!j.is_object()) throw PlaybookError(where, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw PlaybookError(where + "." + it.key(), "unknown field");
}

inline std::string str_field(const nlohmann::json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_string()) throw PlaybookError(where + "." + key, "expected a string");
  return j[key].get<std::string>();
}

}  // namespace detail

inline Playbook playbook_from_json(const nlohmann::json& j) {
  detail::only_fields(j, "playbook", {"id", "entries"});
  Playbook p;
  p.id = detail::str_field(j, "id", "playbook");
  if (!j.contains("entries") || !j["entries"].is_array()) throw PlaybookError("playbook.entries", "expected an array");
  for (std::size_t i = 0; i < j["entries"].size(); ++i) {
    const auto& je = j["entries"][i];
    const std::string where = "entries[" + std::to_string(i) + "]";
    detail::only_fields(je, where, {"evidence", "attempts"});
    PlaybookEntry e;
    if (je.contains("evidence")) {
      const auto& ev = je["evidence"];
      detail::only_fields(ev, where + ".evidence", {"alert_contains", "suspect", "log_contains", "issue_contains"});
      auto opt = [&](const char* k) -> std::optional<std::string> {
        if (!ev.contains(k)) return std::nullopt;
        return detail::str_field(ev, k, where + ".evidence");
      };
      e.evidence.alert_contains = opt("alert_contains");
      e.evidence.log_contains = opt("log_contains");
      e.evidence.issue_contains = opt("issue_contains");
      if (ev.contains("suspect")) {
        const auto& s = ev["suspect"];
        detail::only_fields(s, where + ".evidence.suspect", {"service", "operation"});
        if (s.contains("service")) e.evidence.suspect_service = detail::str_field(s, "service", where + ".suspect");
        if (s.contains("operation"))
          e.evidence.suspect_operation = detail::str_field(s, "operation", where + ".suspect");
      }
    }
    if (!je.contains("attempts") || !je["attempts"].is_array())
      throw PlaybookError(where + ".attempts", "expected an array");
    for (std::size_t k = 0; k < je["attempts"].size(); ++k) {
      const auto& ja = je["attempts"][k];
      const std::string aw = where + ".attempts[" + std::to_string(k) + "]";
      detail::only_fields(ja, aw, {"intent", "commands", "expected"});
      MitigationPlan plan;
      plan.intent = detail::str_field(ja, "intent", aw);
      if (ja.contains("expected")) plan.expected_effect = detail::str_field(ja, "expected", aw);
      if (!ja.contains("commands") || !ja["commands"].is_array())
        throw PlaybookError(aw + ".commands", "expected an array");
      for (const auto& c : ja["commands"]) {
        if (!c.is_string()) throw PlaybookError(aw + ".commands", "expected strings");
        plan.commands.push_back(c.get<std::string>());
      }
      e.attempts.push_back(std::move(plan));
    }
    p.entries.push_back(std::move(e));
  }
  return p;
}

inline nlohmann::json to_json(const Playbook& p) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : p.entries) {
    nlohmann::json ev = nlohmann::json::object();
    if (e.evidence.alert_contains) ev["alert_contains"] = *e.evidence.alert_contains;
    if (e.evidence.log_contains) ev["log_contains"] = *e.evidence.log_contains;
    if (e.evidence.issue_contains) ev["issue_contains"] = *e.evidence.issue_contains;
    if (e.evidence.suspect_service) ev["suspect"]["service"] = *e.evidence.suspect_service;
    if (e.evidence.suspect_operation) ev["suspect"]["operation"] = *e.evidence.suspect_operation;
    nlohmann::json attempts = nlohmann::json::array();
    for (const auto& a : e.attempts)
      attempts.push_back({{"intent", a.intent}, {"commands", a.commands}, {"expected", a.expected_effect}});
    entries.push_back({{"evidence", ev}, {"attempts", attempts}});
  }
  return {{"id", p.id}, {"entries", entries}};
}

inline Playbook load_playbook(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PlaybookError(path, "cannot open playbook");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw PlaybookError(path, e.what());
  }
  return playbook_from_json(j);
}

// Scripted policy: picks the first entry whose evidence matches and returns
// its plan for the current attempt number.
class PlaybookPolicy : public Policy {
 public:
  explicit PlaybookPolicy(Playbook p) : book_(std::move(p)) {}

  std::string name() const override { return "playbook:" + book_.id; }

  Expected<MitigationPlan, PolicyError> propose(const ObservationBundle& o) override {
    if (!entry_) {
      for (std::size_t i = 0; i < book_.entries.size() && !entry_; ++i)
        if (matches(book_.entries[i].evidence, o)) entry_ = i;
    }
    if (!entry_)
      return unexpected(PolicyError{PolicyErrorCode::PlaybookExhausted, "no playbook entry matches the evidence"});
    const auto& attempts = book_.entries[*entry_].attempts;
    if (o.attempt < 1 || o.attempt > static_cast<int>(attempts.size()))
      return unexpected(PolicyError{PolicyErrorCode::PlaybookExhausted,
                                    "no plan for attempt " + std::to_string(o.attempt)});
    return attempts[static_cast<std::size_t>(o.attempt - 1)];
  }

  void forget() override { entry_.reset(); }

 private:
  Playbook book_;
  std::optional<std::size_t> entry_;
};

}  // namespace tnr
