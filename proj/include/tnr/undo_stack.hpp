#pragma once

#include <nlohmann/json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

#include "tnr/inverse.hpp"

namespace tnr {

inline constexpr const char* kEmptyStackMessage = "No more actions to rollback.";

struct UndoEntry {
  Command original;
  InverseAction inverse;
  ResourceFragment pre_resource;
  Snapshot pre_state;  // state the original ran in
  bool caused_crash = false;
};

// How an entry was reverted. Fragment means replaying the inverse left a
// residual difference that the saved resource fragment repaired.
enum class RestoreMethod { Inverse, Fragment };

class InverseFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UndoIncomplete : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RollbackOutcome {
  std::string message;
  std::size_t remaining = 0;
  bool popped = false;
  RestoreMethod method = RestoreMethod::Inverse;
};

inline std::string rollback_message(const UndoEntry& e) {
  return "Rolled back the previous command: " + e.original.text + ", using rollback:" + e.inverse.text();
}

class UndoStack {
 public:
  using Mark = std::size_t;

  void push(UndoEntry e) { entries_.push_back(std::move(e)); }
  std::size_t depth() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const UndoEntry& top() const { return entries_.back(); }
  const std::vector<UndoEntry>& entries() const { return entries_; }
  Mark mark() const { return entries_.size(); }

  // Executes and pops the top inverse. Throws InverseFailed when the
  // environment rejects the inverse.
  RollbackOutcome rollback_last(ClusterState& env) {
    if (entries_.empty()) return {kEmptyStackMessage, 0, false, RestoreMethod::Inverse};
    UndoEntry e = std::move(entries_.back());
    entries_.pop_back();
    RollbackOutcome out{rollback_message(e), entries_.size(), true, RestoreMethod::Inverse};

    ClusterState next = env;
    if (e.caused_crash && next.crashed) {
      // The inverse of the crashing transition runs in recovery mode; a no-op
      // inverse still has to bring the cluster back.
      if (e.inverse.noop) {
        next.crashed = false;
        next = reconcile(std::move(next));
      }
    }
    if (!e.inverse.noop) {
      auto r = apply_write(next, *e.inverse.command, e.caused_crash ? WriteMode::Recover : WriteMode::Normal);
      if (!r) throw InverseFailed("inverse rejected: " + e.inverse.text() + ": " + r.error().message);
      next = std::move(r->state);
    }
    const ClusterState& pre = e.pre_state.state();
    if (!deep_equal(next, pre)) {
      next = restore_fragment(std::move(next), e.pre_resource);
      out.method = RestoreMethod::Fragment;
      log_.push_back("fragment restore after " + e.inverse.text());
    }
    env = std::move(next);
    return out;
  }

  // Pops down to the mark, newest first.
  std::vector<RollbackOutcome> rollback_segment(ClusterState& env, Mark m) {
    if (m > entries_.size()) throw std::out_of_range("segment mark beyond stack depth");
    std::vector<RollbackOutcome> outs;
    while (entries_.size() > m) outs.push_back(rollback_last(env));
    return outs;
  }

  const std::vector<std::string>& log() const { return log_; }

 private:
  std::vector<UndoEntry> entries_;
  std::vector<std::string> log_;
};

inline nlohmann::json to_json(const UndoEntry& e) {
  return {{"original", e.original.text},
          {"inverse", e.inverse.text()},
          {"noop", e.inverse.noop},
          {"caused_crash", e.caused_crash},
          {"resource", e.pre_resource.kind + "/" + e.pre_resource.name}};
}

inline nlohmann::json to_json(const UndoStack& s) {
  auto arr = nlohmann::json::array();
  for (const auto& e : s.entries()) arr.push_back(to_json(e));
  return arr;
}

}  // namespace tnr
