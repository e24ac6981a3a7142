#pragma once

#include <condition_variable>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tnr/audit.hpp"
#include "tnr/health.hpp"
#include "tnr/reads.hpp"
#include "tnr/undo_stack.hpp"

namespace tnr {

enum class WriterId { Mitigation, Undo };

inline std::string_view to_string(WriterId w) { return w == WriterId::Mitigation ? "mitigation" : "undo"; }

// Readers-writer lock whose mode is observable. try_* never block; the
// blocking variants exist for multi-threaded callers.
class ALock {
 public:
  enum class Mode { Free, Read, Write };

  bool try_lock_write(WriterId who) {
    std::lock_guard g(m_);
    if (mode_ != Mode::Free) return false;
    mode_ = Mode::Write;
    holder_ = who;
    return true;
  }

  void lock_write(WriterId who) {
    std::unique_lock g(m_);
    cv_.wait(g, [&] { return mode_ == Mode::Free; });
    mode_ = Mode::Write;
    holder_ = who;
  }

  void unlock_write() {
    {
      std::lock_guard g(m_);
      mode_ = Mode::Free;
      holder_.reset();
    }
    cv_.notify_all();
  }

  bool try_lock_read() {
    std::lock_guard g(m_);
    if (mode_ == Mode::Write) return false;
    mode_ = Mode::Read;
    ++readers_;
    return true;
  }

  void lock_read() {
    std::unique_lock g(m_);
    cv_.wait(g, [&] { return mode_ != Mode::Write; });
    mode_ = Mode::Read;
    ++readers_;
  }

  void unlock_read() {
    {
      std::lock_guard g(m_);
      if (readers_ > 0 && --readers_ == 0) mode_ = Mode::Free;
    }
    cv_.notify_all();
  }

  Mode mode() const {
    std::lock_guard g(m_);
    return mode_;
  }
  int readers() const {
    std::lock_guard g(m_);
    return readers_;
  }
  std::optional<WriterId> holder() const {
    std::lock_guard g(m_);
    return holder_;
  }

 private:
  mutable std::mutex m_;
  std::condition_variable cv_;
  Mode mode_ = Mode::Free;
  int readers_ = 0;
  std::optional<WriterId> holder_;
};

enum class TxnStatus { Open, Committed, Aborted };

inline std::string_view to_string(TxnStatus s) {
  switch (s) {
    case TxnStatus::Open: return "Open";
    case TxnStatus::Committed: return "Committed";
    case TxnStatus::Aborted: return "Aborted";
  }
  return "?";
}

enum class AbortReason { None, Crash, Regression, WindowWithoutImprovement, Policy };

inline std::string_view to_string(AbortReason r) {
  switch (r) {
    case AbortReason::None: return "none";
    case AbortReason::Crash: return "crash";
    case AbortReason::Regression: return "regression";
    case AbortReason::WindowWithoutImprovement: return "window-exceeded-without-improvement";
    case AbortReason::Policy: return "policy";
  }
  return "?";
}

struct TransactionRecord {
  int id = 0;
  int K = 20;
  WriterId writer = WriterId::Mitigation;
  std::vector<Command> actions;
  Snapshot s_pre;
  std::vector<Severity> hidden_path;
  TxnStatus status = TxnStatus::Open;
  Severity s_post_severity;
  AbortReason abort_reason = AbortReason::None;
  bool crashed = false;
  bool window_exceeded = false;
  bool regression_committed = false;  // only when abort-undo is disabled
  std::size_t undo_mark = 0;
};

enum class StepOutcome { Read, Applied, Rejected, Crashed };

inline std::string_view to_string(StepOutcome o) {
  switch (o) {
    case StepOutcome::Read: return "read";
    case StepOutcome::Applied: return "applied";
    case StepOutcome::Rejected: return "rejected";
    case StepOutcome::Crashed: return "crashed";
  }
  return "?";
}

struct StepObservation {
  Severity mu;
  StepOutcome outcome = StepOutcome::Read;
  std::string output;
};

enum class TxnErrorCode { LockHeld, InvalidWindow, NotOpen, WindowExceeded, LintRejected, ClusterDown, UndoIncomplete };

inline std::string_view to_string(TxnErrorCode c) {
  switch (c) {
    case TxnErrorCode::LockHeld: return "LockHeld";
    case TxnErrorCode::InvalidWindow: return "InvalidWindow";
    case TxnErrorCode::NotOpen: return "NotOpen";
    case TxnErrorCode::WindowExceeded: return "WindowExceeded";
    case TxnErrorCode::LintRejected: return "LintRejected";
    case TxnErrorCode::ClusterDown: return "ClusterDown";
    case TxnErrorCode::UndoIncomplete: return "UndoIncomplete";
  }
  return "?";
}

struct TxnError {
  TxnErrorCode code;
  std::string message;
};

struct EngineConfig {
  ProbeConfig probe;
  bool dry_run = true;
  // When false, finalize commits unconditionally (the unsafe baseline).
  bool undo_on_abort = true;
};

class Engine {
 public:
  explicit Engine(ClusterState initial, EngineConfig cfg = {}, AuditLog* audit = nullptr)
      : state_(std::move(initial)), cfg_(cfg), audit_(audit) {}

  // Current state value. Copies are safe to hand to concurrent readers.
  ClusterState read_state() {
    lock_.lock_read();
    ClusterState copy = state_;
    lock_.unlock_read();
    return copy;
  }
  const ClusterState& state() const { return state_; }
  Severity severity() const { return measure(state_, cfg_.probe); }

  const EngineConfig& config() const { return cfg_; }
  ALock& lock() { return lock_; }
  const UndoStack& undo_stack() const { return stack_; }
  const std::vector<std::string>& undo_log() const { return stack_.log(); }

  Expected<TransactionRecord, TxnError> begin(WriterId writer, int K) {
    if (K < 1) return unexpected(TxnError{TxnErrorCode::InvalidWindow, "risk window K must be at least 1"});
    if (!lock_.try_lock_write(writer))
      return unexpected(TxnError{TxnErrorCode::LockHeld, "another writer holds the lock"});
    TransactionRecord t;
    t.id = ++next_id_;
    t.K = K;
    t.writer = writer;
    t.s_pre = snapshot(state_);
    t.hidden_path.push_back(severity());
    t.crashed = state_.crashed;
    t.undo_mark = stack_.mark();
    log({{"event", "begin"}, {"txn", t.id}, {"mu", t.hidden_path.back().to_string()}});
    return t;
  }

  Expected<StepObservation, TxnError> step(TransactionRecord& t, const Command& c) {
    if (t.status != TxnStatus::Open) return unexpected(TxnError{TxnErrorCode::NotOpen, "transaction is not open"});
    if (static_cast<int>(t.actions.size()) >= t.K) {
      t.window_exceeded = true;
      return unexpected(TxnError{TxnErrorCode::WindowExceeded,
                                 "risk window of " + std::to_string(t.K) + " actions exhausted; finalize first"});
    }
    auto verdict = lint(c, Role::Writer);
    if (!verdict.allowed) return unexpected(TxnError{TxnErrorCode::LintRejected, verdict.reason});
    if (t.crashed)
      return unexpected(TxnError{TxnErrorCode::ClusterDown, "cluster is down; the transaction must abort"});

    const Severity before = t.hidden_path.back();
    StepObservation obs;
    if (classify(c) == CommandClass::Read) {
      obs = {before, StepOutcome::Read, execute_read(state_, c)};
    } else {
      auto inv = synthesize_inverse(state_, c);
      if (!inv) return unexpected(TxnError{TxnErrorCode::LintRejected, inv.error().reason});
      PredictedOutcome pred{true, {}};
      if (cfg_.dry_run) pred = dry_run(state_, c);
      auto r = pred.ok ? apply_write(state_, c) : Expected<WriteResult, WriteError>(unexpected(WriteError{}));
      if (!r) {
        obs = {before, StepOutcome::Rejected, pred.ok ? r.error().message : pred.message};
      } else {
        UndoEntry e{c, *inv, capture_fragment(state_, c), snapshot(state_), r->state.crashed};
        stack_.push(std::move(e));
        state_ = std::move(r->state);
        t.crashed = state_.crashed;
        obs = {severity(), t.crashed ? StepOutcome::Crashed : StepOutcome::Applied, std::move(r->output)};
      }
    }
    t.actions.push_back(c);
    t.hidden_path.push_back(obs.mu);
    log({{"event", "step"},
         {"txn", t.id},
         {"command", c.text},
         {"mu_before", before.to_string()},
         {"mu_after", obs.mu.to_string()},
         {"verdict", to_string(obs.outcome)},
         {"output", obs.output}});
    return obs;
  }

  // Commit iff the cluster is up and mu(s_post) <= mu(s_pre); otherwise the
  // undo role reverts this transaction's stack segment exactly once.
  Expected<TxnStatus, TxnError> finalize(TransactionRecord& t, bool force_abort = false) {
    if (t.status != TxnStatus::Open) return unexpected(TxnError{TxnErrorCode::NotOpen, "transaction is not open"});
    const Severity pre = t.hidden_path.front();
    const Severity post = t.hidden_path.back();

    AbortReason reason = AbortReason::None;
    if (t.crashed || post.is_infinite())
      reason = AbortReason::Crash;
    else if (force_abort)
      reason = AbortReason::Policy;
    else if (post > pre)
      reason = AbortReason::Regression;
    else if (t.window_exceeded && post == pre)
      reason = AbortReason::WindowWithoutImprovement;

    if (reason == AbortReason::None || !cfg_.undo_on_abort) {
      t.status = TxnStatus::Committed;
      t.s_post_severity = post;
      t.regression_committed = post > pre;
      lock_.unlock_write();
      log({{"event", "commit"}, {"txn", t.id}, {"mu_pre", pre.to_string()}, {"mu_post", post.to_string()}});
      return TxnStatus::Committed;
    }

    // Hand the lock from the mitigation role to the undo role.
    lock_.unlock_write();
    lock_.lock_write(WriterId::Undo);
    std::optional<TxnError> failure;
    try {
      stack_.rollback_segment(state_, t.undo_mark);
    } catch (const InverseFailed& e) {
      failure = TxnError{TxnErrorCode::UndoIncomplete, e.what()};
    }
    if (!failure && !deep_equal(state_, t.s_pre.state()))
      failure = TxnError{TxnErrorCode::UndoIncomplete, "post-undo state differs from the checkpoint"};
    lock_.unlock_write();
    t.status = TxnStatus::Aborted;
    t.abort_reason = reason;
    t.s_post_severity = pre;
    log({{"event", "abort"},
         {"txn", t.id},
         {"reason", to_string(reason)},
         {"mu_pre", pre.to_string()},
         {"mu_hidden_post", post.to_string()},
         {"undo_ok", !failure}});
    if (failure) return unexpected(*failure);
    return TxnStatus::Aborted;
  }

  // Reverts every entry on the stack, committed work included, so the next
  // round starts from the state the stack was opened on. Returns the
  // rollback tool messages, ending with the empty-stack message.
  Expected<std::vector<std::string>, TxnError> rollback_all() {
    if (!lock_.try_lock_write(WriterId::Undo))
      return unexpected(TxnError{TxnErrorCode::LockHeld, "another writer holds the lock"});
    std::vector<std::string> msgs;
    try {
      for (;;) {
        auto out = stack_.rollback_last(state_);
        msgs.push_back(out.message);
        if (!out.popped) break;
      }
    } catch (const InverseFailed& e) {
      lock_.unlock_write();
      return unexpected(TxnError{TxnErrorCode::UndoIncomplete, e.what()});
    }
    lock_.unlock_write();
    log({{"event", "rollback"}, {"count", msgs.size() - 1}});
    return msgs;
  }

  // Replaces the state outside any transaction (fault injection, harness
  // setup). Clears the undo stack.
  void reset(ClusterState s) {
    state_ = std::move(s);
    stack_ = UndoStack{};
  }

 private:
  void log(nlohmann::json j) {
    if (audit_) audit_->append(std::move(j));
  }

  ClusterState state_;
  EngineConfig cfg_;
  AuditLog* audit_;
  ALock lock_;
  UndoStack stack_;
  int next_id_ = 0;
};

// Externally visible severities: the baseline, then each finalized
// transaction's endpoint (mu(s_post) on commit, mu(s_pre) on abort).
inline std::vector<Severity> visible_trajectory(const std::vector<TransactionRecord>& history, const Severity& b) {
  std::vector<Severity> v{b};
  for (const auto& t : history) {
    if (t.status == TxnStatus::Open) continue;
    const Severity& pre = t.hidden_path.front();
    if (v.back() != pre) v.push_back(pre);
    v.push_back(t.status == TxnStatus::Committed ? t.s_post_severity : pre);
  }
  return v;
}

}  // namespace tnr
