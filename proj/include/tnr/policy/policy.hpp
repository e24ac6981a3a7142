#pragma once

#include <nlohmann/json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

#include "tnr/lint.hpp"
#include "tnr/policy/observation.hpp"

namespace tnr {

struct MitigationPlan {
  std::string intent;
  std::vector<std::string> commands;
  std::string expected_effect;
};

enum class PolicyErrorCode { PlaybookExhausted, ProtocolTimeout, MalformedPlan };

inline std::string_view to_string(PolicyErrorCode c) {
  switch (c) {
    case PolicyErrorCode::PlaybookExhausted: return "PlaybookExhausted";
    case PolicyErrorCode::ProtocolTimeout: return "ProtocolTimeout";
    case PolicyErrorCode::MalformedPlan: return "MalformedPlan";
  }
  return "?";
}

struct PolicyError {
  PolicyErrorCode code;
  std::string message;
};

enum class Detection { Healthy, Anomalous };

// Anomalous iff anything alerts or any probe request failed.
inline Detection default_detect(const ObservationBundle& o) {
  return o.alerts.empty() && o.failed_requests == 0 ? Detection::Healthy : Detection::Anomalous;
}

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual Detection detect(const ObservationBundle& o) { return default_detect(o); }
  virtual Expected<MitigationPlan, PolicyError> propose(const ObservationBundle& o) = 0;
  // Thought dropout: drop everything but the reflection note between rounds.
  virtual void forget() {}
};

// Every command must parse and lint for the writer role.
inline Expected<std::vector<Command>, PolicyError> validate_plan(const MitigationPlan& p) {
  std::vector<Command> out;
  for (const auto& text : p.commands) {
    auto c = parse(text);
    if (!c) return unexpected(PolicyError{PolicyErrorCode::MalformedPlan, verdict_for(c.error()).reason});
    auto v = lint(*c, Role::Writer);
    if (!v.allowed) return unexpected(PolicyError{PolicyErrorCode::MalformedPlan, v.reason});
    out.push_back(std::move(*c));
  }
  return out;
}

inline std::string summarize(const MitigationPlan& p) {
  std::string s = p.intent + " [";
  for (std::size_t i = 0; i < p.commands.size(); ++i) {
    if (i) s += "; ";
    auto nl = p.commands[i].find('\n');
    s += nl == std::string::npos ? p.commands[i] : p.commands[i].substr(0, nl);
  }
  return s + "]";
}

// Requires at least one issue: reflection only follows a failed validation.
inline ReflectionNote reflect(const std::vector<std::string>& issues, const MitigationPlan& plan, int round,
                              const std::optional<ReflectionNote>& prior = std::nullopt) {
  if (issues.empty()) throw std::invalid_argument("reflection needs at least one oracle issue");
  ReflectionNote n;
  n.round = round;
  n.issues = issues;
  n.prior_plan = summarize(plan);
  if (prior) n.plan_history = prior->plan_history;
  n.plan_history.push_back(n.prior_plan);
  n.hypothesis = "plan \"" + plan.intent + "\" left " + std::to_string(issues.size()) +
                 " issue(s), first: " + issues.front() + "; try a different remedy";
  return n;
}

inline nlohmann::json to_json(const MitigationPlan& p) {
  return {{"intent", p.intent}, {"commands", p.commands}, {"expected_effect", p.expected_effect}};
}

inline Expected<MitigationPlan, PolicyError> plan_from_json(const nlohmann::json& j) {
  auto bad = [](std::string m) { return unexpected(PolicyError{PolicyErrorCode::MalformedPlan, std::move(m)}); };
  if (!j.is_object()) return bad("plan document must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "intent" && it.key() != "commands" && it.key() != "expected_effect")
      return bad("unknown plan field: " + it.key());
  if (!j.contains("commands") || !j["commands"].is_array()) return bad("plan needs a commands array");
  MitigationPlan p;
  if (j.contains("intent")) {
    if (!j["intent"].is_string()) return bad("intent must be a string");
    p.intent = j["intent"].get<std::string>();
  }
  if (j.contains("expected_effect")) {
    if (!j["expected_effect"].is_string()) return bad("expected_effect must be a string");
    p.expected_effect = j["expected_effect"].get<std::string>();
  }
  for (const auto& c : j["commands"]) {
    if (!c.is_string()) return bad("commands must be strings");
    p.commands.push_back(c.get<std::string>());
  }
  return p;
}

}  // namespace tnr
