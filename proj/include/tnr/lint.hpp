#pragma once

// Command confinement. Every rejection reason comes from the message catalog
// below; docs/messages.txt is the same table in text form and a unit test
// keeps the two identical.

#include <array>
#include <string>
#include <string_view>

#include "tnr/command.hpp"

namespace tnr {

enum class Role { ReadOnly, Writer };

enum class BlockRule {
  NamespaceDeletion,
  InteractiveCommand,
  Stdin,
  InteractiveFlag,
  Pipe,
  Compound,
  Substitution,
  FlowControl,
  Function,
  ReadOnlyWrite,
  NoInverse,
  Malformed,
};

struct CatalogEntry {
  BlockRule rule;
  std::string_view key;
  std::string_view message;  // "{}" is replaced by the offending token
};

inline constexpr std::array<CatalogEntry, 12> kMessageCatalog = {{
    {BlockRule::NamespaceDeletion, "namespace-deletion", "Namespace deletion is not allowed."},
    {BlockRule::InteractiveCommand, "interactive-command",
     "Interactive command detected: {}. Such commands are not supported."},
    {BlockRule::Stdin, "stdin", "Stdin redirection is not allowed."},
    {BlockRule::InteractiveFlag, "interactive-flag", "Interactive flag detected: {}. Such commands are not supported."},
    {BlockRule::Pipe, "pipe", "Pipe operator detected: {}. Only a single command is allowed."},
    {BlockRule::Compound, "compound", "Compound command detected: {}. Only a single command is allowed."},
    {BlockRule::Substitution, "substitution", "Command substitution detected: {}. Such commands are not supported."},
    {BlockRule::FlowControl, "flow-control", "Flow control detected: {}. Such commands are not supported."},
    {BlockRule::Function, "function", "Shell function definition detected: {}. Such commands are not supported."},
    {BlockRule::ReadOnlyWrite, "read-only-write", "Write command {} is not allowed for read-only agents."},
    {BlockRule::NoInverse, "no-inverse", "Command {} has no undo operator and is not allowed."},
    {BlockRule::Malformed, "malformed", "Malformed command: {}."},
}};

inline std::string catalog_message(BlockRule rule, std::string_view token = {}) {
  for (const auto& e : kMessageCatalog) {
    if (e.rule != rule) continue;
    std::string msg(e.message);
    if (auto p = msg.find("{}"); p != std::string::npos) msg.replace(p, 2, token);
    return msg;
  }
  return "Blocked.";
}

struct LintVerdict {
  bool allowed = true;
  std::string reason;
  std::optional<BlockRule> rule;

  static LintVerdict allow() { return {}; }
  static LintVerdict block(BlockRule r, std::string_view token = {}) { return {false, catalog_message(r, token), r}; }
};

inline BlockRule rule_for(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::PipeDetected: return BlockRule::Pipe;
    case ParseErrorKind::CompoundDetected: return BlockRule::Compound;
    case ParseErrorKind::SubstitutionDetected: return BlockRule::Substitution;
    case ParseErrorKind::FlowControlDetected: return BlockRule::FlowControl;
    case ParseErrorKind::FunctionDetected: return BlockRule::Function;
    case ParseErrorKind::StdinDetected: return BlockRule::Stdin;
    case ParseErrorKind::Malformed: return BlockRule::Malformed;
  }
  return BlockRule::Malformed;
}

inline LintVerdict verdict_for(const ParseError& e) { return LintVerdict::block(rule_for(e.kind), e.detail); }

// Whether an inverse can be synthesized for a write of this shape, decided
// from the command alone.
inline bool statically_invertible(const Command& c) {
  const auto& k = c.kind;
  auto one_of = [&](std::initializer_list<std::string_view> kinds) {
    return std::find(kinds.begin(), kinds.end(), k) != kinds.end();
  };
  switch (c.verb) {
    case Verb::Apply: return c.manifest.has_value() || c.flag_value({"-f", "--filename"}) == std::optional<std::string>("-");
    case Verb::Delete: return c.name.has_value() && one_of({"pod", "deployment", "service", "pvc", "storageclass", "node"});
    case Verb::Patch: return c.name.has_value() && one_of({"deployment", "service", "node", "pvc", "storageclass"});
    case Verb::Scale: return k == "deployment";
    case Verb::Create: return c.manifest.has_value() || one_of({"deployment", "storageclass"});
    case Verb::Cordon:
    case Verb::Uncordon: return true;
    case Verb::RolloutRestart: return k == "deployment";
    default: return false;
  }
}

inline LintVerdict lint(const Command& c, Role role) {
  if (c.verb == Verb::Delete && c.kind == "namespace") return LintVerdict::block(BlockRule::NamespaceDeletion);
  if (c.verb == Verb::Edit) return LintVerdict::block(BlockRule::InteractiveCommand, "edit");
  if (c.verb == Verb::Debug) return LintVerdict::block(BlockRule::InteractiveCommand, "debug");
  if (!c.heredoc && c.flag_value({"-f", "--filename"}) == std::optional<std::string>("-"))
    return LintVerdict::block(BlockRule::Stdin);
  for (const auto& f : c.flags) {
    const auto& n = f.name;
    bool interactive = n == "--stdin" || n == "--tty" || n == "-i" || n == "-t";
    if (!interactive && n.size() > 1 && n[0] == '-' && n[1] != '-') {
      // combined short flags such as -it or -ti
      interactive = n.find_first_not_of("it", 1) == std::string::npos;
    }
    if (interactive && f.value.value_or("true") != "false") return LintVerdict::block(BlockRule::InteractiveFlag, n);
  }
  if (classify(c) == CommandClass::Write) {
    if (role == Role::ReadOnly) return LintVerdict::block(BlockRule::ReadOnlyWrite, to_string(c.verb));
    if (!statically_invertible(c)) {
      std::string what(to_string(c.verb));
      if (!c.kind.empty() && c.verb != Verb::Exec && c.verb != Verb::Attach) what += " " + c.kind;
      return LintVerdict::block(BlockRule::NoInverse, what);
    }
  }
  return LintVerdict::allow();
}

// Parse and lint in one go.
inline LintVerdict check(std::string_view text, Role role) {
  auto parsed = parse(text);
  if (!parsed) return verdict_for(parsed.error());
  return lint(*parsed, role);
}

}  // namespace tnr
