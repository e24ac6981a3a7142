#pragma once

#include <nlohmann/json.hpp>

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tnr/oracles.hpp"
#include "tnr/policy/policy.hpp"
#include "tnr/scenario.hpp"
#include "tnr/txn_engine.hpp"

namespace tnr {

enum class Ablation { Full, NoRetry, NaiveRetryNoUndo };

inline std::string_view to_string(Ablation a) {
  switch (a) {
    case Ablation::Full: return "full";
    case Ablation::NoRetry: return "noretry";
    case Ablation::NaiveRetryNoUndo: return "naive";
  }
  return "?";
}

inline std::optional<Ablation> ablation_from(std::string_view s) {
  if (s == "full") return Ablation::Full;
  if (s == "noretry") return Ablation::NoRetry;
  if (s == "naive") return Ablation::NaiveRetryNoUndo;
  return std::nullopt;
}

struct RunConfig {
  int K = 20;
  int retry_limit = 9;
  std::optional<int> step_limit;
  Ablation ablation = Ablation::Full;
  bool thought_dropout = true;
  std::uint64_t seed = 7;
  SeverityWeights weights;
  int transaction_probe = 100;
  int validation_probe = 117;
  int settle_steps = 0;  // reconcile is synchronous, so settling changes nothing
  bool dry_run = true;
};

struct AblationEffects {
  int retry_limit;
  bool rollback_leftovers;  // start each retry from the scenario's faulty state
  bool undo_on_abort;       // finalize reverts failed transactions
  bool enforce_tnr;         // a visible regression is an invariant violation
};

inline AblationEffects ablation_mode_effects(const RunConfig& c) {
  switch (c.ablation) {
    case Ablation::Full: return {c.retry_limit, true, true, true};
    case Ablation::NoRetry: return {0, true, true, true};
    case Ablation::NaiveRetryNoUndo: return {c.retry_limit, false, false, false};
  }
  return {c.retry_limit, true, true, true};
}

enum class Phase { Init, Detect, Rollback, Bootstrap, Mitigate, Validate, Reflect, Terminate };

inline std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Init: return "Init";
    case Phase::Detect: return "Detect";
    case Phase::Rollback: return "Rollback";
    case Phase::Bootstrap: return "Bootstrap";
    case Phase::Mitigate: return "Mitigate";
    case Phase::Validate: return "Validate";
    case Phase::Reflect: return "Reflect";
    case Phase::Terminate: return "Terminate";
  }
  return "?";
}

enum class Termination { None, Success, DetectedHealthy, RetryExhausted, StepLimit, PolicyExhausted };

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::None: return "none";
    case Termination::Success: return "success";
    case Termination::DetectedHealthy: return "detected-healthy";
    case Termination::RetryExhausted: return "retry-exhausted";
    case Termination::StepLimit: return "step-limit";
    case Termination::PolicyExhausted: return "policy-exhausted";
  }
  return "?";
}

struct MachineInputs {
  bool healthy = false;             // Detect
  bool policy_exhausted = false;    // Mitigate
  bool validation_success = false;  // Validate
  bool step_limit_hit = false;      // Validate
  int retries_used = 0;             // Reflect
  int retry_limit = 0;              // Reflect
  bool rollback_leftovers = true;   // Detect, Reflect
};

struct Transition {
  Phase next;
  Termination termination = Termination::None;
};

// Total transition function of the episode machine.
inline Transition machine_step(Phase p, const MachineInputs& in) {
  const Phase round_start = in.rollback_leftovers ? Phase::Rollback : Phase::Bootstrap;
  switch (p) {
    case Phase::Init: return {Phase::Detect};
    case Phase::Detect:
      if (in.healthy) return {Phase::Terminate, Termination::DetectedHealthy};
      return {round_start};
    case Phase::Rollback: return {Phase::Bootstrap};
    case Phase::Bootstrap: return {Phase::Mitigate};
    case Phase::Mitigate:
      if (in.policy_exhausted) return {Phase::Terminate, Termination::PolicyExhausted};
      return {Phase::Validate};
    case Phase::Validate:
      if (in.validation_success) return {Phase::Terminate, Termination::Success};
      if (in.step_limit_hit) return {Phase::Terminate, Termination::StepLimit};
      return {Phase::Reflect};
    case Phase::Reflect:
      if (in.retries_used >= in.retry_limit) return {Phase::Terminate, Termination::RetryExhausted};
      return {round_start};
    case Phase::Terminate: return {Phase::Terminate};
  }
  return {Phase::Terminate};
}

class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TxnSummary {
  int id = 0;
  TxnStatus status = TxnStatus::Open;
  AbortReason reason = AbortReason::None;
  std::vector<std::string> commands;
  std::vector<Severity> hidden_path;
  bool regression_committed = false;
};

struct RoundRecord {
  int round = 0;
  std::vector<std::string> rollback_messages;
  std::string intent;
  std::vector<std::string> commands;
  std::optional<PolicyError> policy_error;
  std::vector<TxnSummary> transactions;
  int steps = 0;
  bool validation_success = false;
  std::vector<std::string> issues;
  std::optional<ReflectionNote> reflection;
};

struct EpisodeReport {
  std::string scenario_id;
  std::string ablation;
  bool solved = false;
  Termination termination = Termination::None;
  Severity baseline;
  std::vector<Severity> visible;
  int retries = 0;
  int steps = 0;
  int max_txn_actions = 0;
  double wall_ms = 0;
  std::vector<RoundRecord> rounds;
  std::vector<Phase> phases;
  std::vector<std::string> undo_fallbacks;
  bool regression_visible = false;  // some visible value exceeded the baseline
};

namespace detail {

inline void record_txn(RoundRecord& round, const TransactionRecord& t) {
  TxnSummary s{t.id, t.status, t.abort_reason, {}, t.hidden_path, t.regression_committed};
  for (const auto& c : t.actions) s.commands.push_back(c.text);
  round.transactions.push_back(std::move(s));
}

}  // namespace detail

inline EpisodeReport run_episode(const Scenario& sc, Policy& policy, const RunConfig& cfg, AuditLog* audit = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  const AblationEffects fx = ablation_mode_effects(cfg);
  if (cfg.K < 1) throw std::invalid_argument("K must be at least 1");
  if (cfg.retry_limit < 0) throw std::invalid_argument("retry limit must be non-negative");

  const int validation_n = sc.probe.validation_requests.value_or(cfg.validation_probe);
  const std::uint64_t seed = sc.probe.seed.value_or(cfg.seed);
  EngineConfig ec;
  ec.probe = {sc.probe.transaction_requests.value_or(cfg.transaction_probe), seed, cfg.weights};
  ec.dry_run = cfg.dry_run;
  ec.undo_on_abort = fx.undo_on_abort;

  EpisodeReport rep;
  rep.scenario_id = sc.id;
  rep.ablation = std::string(to_string(cfg.ablation));

  // Init
  rep.phases.push_back(Phase::Init);
  const ClusterState s0 = sc.faulted();
  Engine engine(s0, ec, audit);
  rep.baseline = engine.severity();
  rep.visible.push_back(rep.baseline);
  if (audit) audit->append({{"event", "init"}, {"scenario", sc.id}, {"baseline", rep.baseline.to_string()}});

  auto see = [&](const Severity& mu) {
    rep.visible.push_back(mu);
    if (mu > rep.baseline) {
      rep.regression_visible = true;
      if (fx.enforce_tnr)
        throw InvariantViolation("visible severity " + mu.to_string() + " exceeds baseline " +
                                 rep.baseline.to_string() + " in " + sc.id);
    }
  };

  MachineInputs in;
  in.retry_limit = fx.retry_limit;
  in.rollback_leftovers = fx.rollback_leftovers;
  Phase phase = machine_step(Phase::Init, in).next;
  Termination term = Termination::None;
  int round = 0;
  bool round_open = false;
  std::optional<ReflectionNote> note;
  std::optional<MitigationPlan> plan;
  ValidationResult validation;

  while (phase != Phase::Terminate) {
    rep.phases.push_back(phase);
    switch (phase) {
      case Phase::Detect: {
        auto obs = observe(engine.state(), validation_n, seed, 1, std::nullopt);
        in.healthy = policy.detect(obs) == Detection::Healthy;
        break;
      }
      case Phase::Rollback: {
        auto msgs = engine.rollback_all();
        if (!msgs) throw InvariantViolation("rollback failed: " + msgs.error().message);
        if (!deep_equal(engine.state(), s0)) throw InvariantViolation("rollback did not restore the initial state");
        rep.rounds.push_back(RoundRecord{});
        round_open = true;
        rep.rounds.back().rollback_messages = *msgs;
        if (msgs->size() > 1) see(engine.severity());
        break;
      }
      case Phase::Bootstrap: {
        ++round;
        if (!round_open) rep.rounds.push_back(RoundRecord{});
        round_open = false;
        rep.rounds.back().round = round;
        if (cfg.thought_dropout) policy.forget();
        break;
      }
      case Phase::Mitigate: {
        RoundRecord& rr = rep.rounds.back();
        auto obs = observe(engine.state(), validation_n, seed, round, note);
        auto proposed = policy.propose(obs);
        in.policy_exhausted = false;
        plan.reset();
        if (!proposed) {
          rr.policy_error = proposed.error();
          in.policy_exhausted = proposed.error().code == PolicyErrorCode::PlaybookExhausted;
          break;
        }
        plan = *proposed;
        rr.intent = plan->intent;
        rr.commands = plan->commands;
        auto cmds = validate_plan(*plan);
        if (!cmds) {
          rr.policy_error = cmds.error();
          break;
        }
        std::size_t next = 0;
        while (next < cmds->size() && !in.step_limit_hit) {
          if (cfg.step_limit && rep.steps >= *cfg.step_limit) {
            in.step_limit_hit = true;
            break;
          }
          auto t = engine.begin(WriterId::Mitigation, cfg.K);
          if (!t) throw InvariantViolation("begin failed: " + t.error().message);
          for (int k = 0; k < cfg.K && next < cmds->size(); ++k) {
            if (cfg.step_limit && rep.steps >= *cfg.step_limit) {
              in.step_limit_hit = true;
              break;
            }
            auto r = engine.step(*t, (*cmds)[next]);
            ++next;
            if (!r) {
              if (r.error().code == TxnErrorCode::ClusterDown) {
                next = cmds->size();  // nothing more can run this round
                break;
              }
              throw InvariantViolation("step failed: " + r.error().message);
            }
            ++rep.steps;
            ++rr.steps;
          }
          rep.max_txn_actions = std::max(rep.max_txn_actions, static_cast<int>(t->actions.size()));
          auto fin = engine.finalize(*t);
          if (!fin) throw InvariantViolation("undo incomplete in " + sc.id + ": " + fin.error().message);
          detail::record_txn(rr, *t);
          const Severity& pre = t->hidden_path.front();
          if (rep.visible.back() != pre) see(pre);
          see(t->s_post_severity);
        }
        break;
      }
      case Phase::Validate: {
        auto wl = run_workload(engine.state(), validation_n, seed);
        validation = combined_validate(engine.state(), wl);
        in.validation_success = validation.success;
        rep.rounds.back().validation_success = validation.success;
        rep.rounds.back().issues = validation.issues;
        if (audit)
          audit->append({{"event", "validate"}, {"round", round}, {"success", validation.success},
                         {"issues", validation.issues}});
        break;
      }
      case Phase::Reflect: {
        MitigationPlan failed = plan.value_or(MitigationPlan{
            rep.rounds.back().policy_error ? std::string(to_string(rep.rounds.back().policy_error->code))
                                           : std::string("no plan"),
            {},
            {}});
        note = reflect(validation.issues, failed, round, note);
        rep.rounds.back().reflection = note;
        in.retries_used = round - 1;
        break;
      }
      default: break;
    }
    auto tr = machine_step(phase, in);
    phase = tr.next;
    term = tr.termination;
  }
  rep.phases.push_back(Phase::Terminate);
  rep.termination = term;
  // a round that found no plan to run is not a retry
  rep.retries = std::max(0, round - 1 - (term == Termination::PolicyExhausted && round > 1 ? 1 : 0));
  const auto final_wl = run_workload(engine.state(), validation_n, seed);
  rep.solved = combined_validate(engine.state(), final_wl).success;
  rep.undo_fallbacks = engine.undo_log();
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  if (audit)
    audit->append({{"event", "terminate"}, {"termination", to_string(term)}, {"solved", rep.solved},
                   {"steps", rep.steps}, {"retries", rep.retries}});
  return rep;
}

inline nlohmann::json to_json(const EpisodeReport& r) {
  using nlohmann::json;
  json rounds = json::array();
  for (const auto& rr : r.rounds) {
    json txns = json::array();
    for (const auto& t : rr.transactions) {
      json hidden = json::array();
      for (const auto& mu : t.hidden_path) hidden.push_back(mu.to_string());
      txns.push_back({{"id", t.id},
                      {"status", to_string(t.status)},
                      {"abort_reason", to_string(t.reason)},
                      {"commands", t.commands},
                      {"hidden_path", hidden},
                      {"regression_committed", t.regression_committed}});
    }
    json jr = {{"round", rr.round},
               {"rollback_messages", rr.rollback_messages},
               {"intent", rr.intent},
               {"commands", rr.commands},
               {"transactions", txns},
               {"steps", rr.steps},
               {"validation_success", rr.validation_success},
               {"issues", rr.issues}};
    jr["policy_error"] = rr.policy_error ? json{{"code", to_string(rr.policy_error->code)},
                                                {"message", rr.policy_error->message}}
                                         : json(nullptr);
    jr["reflection"] = rr.reflection ? to_json(*rr.reflection) : json(nullptr);
    rounds.push_back(std::move(jr));
  }
  json visible = json::array();
  for (const auto& mu : r.visible) visible.push_back(mu.to_string());
  json phases = json::array();
  for (auto p : r.phases) phases.push_back(to_string(p));
  return {{"scenario", r.scenario_id},
          {"ablation", r.ablation},
          {"solved", r.solved},
          {"termination", to_string(r.termination)},
          {"baseline", r.baseline.to_string()},
          {"visible", visible},
          {"retries", r.retries},
          {"steps", r.steps},
          {"max_txn_actions", r.max_txn_actions},
          {"wall_ms", r.wall_ms},
          {"regression_visible", r.regression_visible},
          {"undo_fallbacks", r.undo_fallbacks},
          {"phases", phases},
          {"rounds", rounds}};
}

}  // namespace tnr
