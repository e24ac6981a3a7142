#pragma once

// kubectl-style command parsing. The grammar is documented in docs/commands.md.
// Shell constructs (pipes, compound lists, substitutions, flow control,
// function definitions, stdin redirection) are detected on the raw text
// before any verb dispatch.

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tnr/expected.hpp"
#include "tnr/manifest.hpp"

namespace tnr {

enum class Verb {
  Get,
  Describe,
  Logs,
  Apply,
  Delete,
  Patch,
  Scale,
  Create,
  Cordon,
  Uncordon,
  RolloutRestart,
  Exec,
  Edit,
  Debug,
  Attach,
};

inline std::string_view to_string(Verb v) {
  switch (v) {
    case Verb::Get: return "get";
    case Verb::Describe: return "describe";
    case Verb::Logs: return "logs";
    case Verb::Apply: return "apply";
    case Verb::Delete: return "delete";
    case Verb::Patch: return "patch";
    case Verb::Scale: return "scale";
    case Verb::Create: return "create";
    case Verb::Cordon: return "cordon";
    case Verb::Uncordon: return "uncordon";
    case Verb::RolloutRestart: return "rollout restart";
    case Verb::Exec: return "exec";
    case Verb::Edit: return "edit";
    case Verb::Debug: return "debug";
    case Verb::Attach: return "attach";
  }
  return "?";
}

enum class CommandClass { Read, Write };

struct Flag {
  std::string name;  // including dashes, as typed
  std::optional<std::string> value;

  friend bool operator==(const Flag&, const Flag&) = default;
};

struct Command {
  std::string text;  // the command as issued
  Verb verb = Verb::Get;
  std::string kind;  // canonical kind: pod, deployment, service, pvc, storageclass, node, namespace, ...
  std::optional<std::string> name;
  std::optional<std::string> ns;
  std::vector<Flag> flags;
  std::vector<std::string> args;  // extra positionals and everything after "--"
  std::optional<Manifest> manifest;
  bool heredoc = false;

  bool has_flag(std::string_view f) const {
    return std::any_of(flags.begin(), flags.end(), [&](const Flag& x) { return x.name == f; });
  }
  std::optional<std::string> flag_value(std::initializer_list<std::string_view> names) const {
    for (const auto& f : flags)
      for (auto n : names)
        if (f.name == n) return f.value;
    return std::nullopt;
  }
  bool dry_run_flag() const {
    for (const auto& f : flags)
      if (f.name == "--dry-run" && f.value.value_or("client") != "none") return true;
    return false;
  }
};

enum class ParseErrorKind {
  PipeDetected,
  CompoundDetected,
  SubstitutionDetected,
  FlowControlDetected,
  FunctionDetected,
  StdinDetected,
  Malformed,
};

inline std::string_view to_string(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::PipeDetected: return "PipeDetected";
    case ParseErrorKind::CompoundDetected: return "CompoundDetected";
    case ParseErrorKind::SubstitutionDetected: return "SubstitutionDetected";
    case ParseErrorKind::FlowControlDetected: return "FlowControlDetected";
    case ParseErrorKind::FunctionDetected: return "FunctionDetected";
    case ParseErrorKind::StdinDetected: return "StdinDetected";
    case ParseErrorKind::Malformed: return "Malformed";
  }
  return "?";
}

struct ParseError {
  ParseErrorKind kind;
  std::string detail;  // the offending token, or a description for Malformed

  friend bool operator==(const ParseError&, const ParseError&) = default;
};

inline CommandClass classify(const Command& c) {
  switch (c.verb) {
    case Verb::Get:
    case Verb::Describe:
    case Verb::Logs: return CommandClass::Read;
    default: return CommandClass::Write;
  }
}

// Canonical resource kind for a kubectl resource token, or the token itself.
inline std::string canonical_kind(std::string_view token) {
  static const std::map<std::string, std::string, std::less<>> aliases = {
      {"po", "pod"},
      {"pod", "pod"},
      {"pods", "pod"},
      {"deploy", "deployment"},
      {"deployment", "deployment"},
      {"deployments", "deployment"},
      {"deployment.apps", "deployment"},
      {"deployments.apps", "deployment"},
      {"svc", "service"},
      {"service", "service"},
      {"services", "service"},
      {"pvc", "pvc"},
      {"pvcs", "pvc"},
      {"persistentvolumeclaim", "pvc"},
      {"persistentvolumeclaims", "pvc"},
      {"sc", "storageclass"},
      {"storageclass", "storageclass"},
      {"storageclasses", "storageclass"},
      {"storageclass.storage.k8s.io", "storageclass"},
      {"storageclasses.storage.k8s.io", "storageclass"},
      {"no", "node"},
      {"node", "node"},
      {"nodes", "node"},
      {"ns", "namespace"},
      {"namespace", "namespace"},
      {"namespaces", "namespace"},
      {"ep", "endpoints"},
      {"endpoints", "endpoints"},
      {"ev", "events"},
      {"event", "events"},
      {"events", "events"},
      {"all", "all"},
  };
  std::string lower(token);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (auto it = aliases.find(lower); it != aliases.end()) return it->second;
  return lower;
}

namespace detail {

struct ScanResult {
  std::vector<std::string> words;
  std::optional<std::string> heredoc_body;
  std::vector<ParseError> findings;
};

inline bool is_name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; }

// Splits the command line into words while recording every shell construct it
// meets. A heredoc (<<DELIM ... DELIM) is lifted out as a manifest body.
inline ScanResult scan(std::string_view text) {
  ScanResult r;
  std::string cur;
  bool in_word = false;
  auto flush = [&] {
    if (in_word) r.words.push_back(cur);
    cur.clear();
    in_word = false;
  };
  auto find = [&](ParseErrorKind k, std::string d) { r.findings.push_back({k, std::move(d)}); };

  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    char c = text[i];
    if (c == '\'') {
      in_word = true;
      auto end = text.find('\'', i + 1);
      if (end == std::string_view::npos) {
        find(ParseErrorKind::Malformed, "unterminated single quote");
        return r;
      }
      cur.append(text.substr(i + 1, end - i - 1));
      i = end + 1;
      continue;
    }
    if (c == '"') {
      in_word = true;
      ++i;
      bool closed = false;
      while (i < n) {
        char d = text[i];
        if (d == '"') {
          closed = true;
          ++i;
          break;
        }
        if (d == '\\' && i + 1 < n) {
          cur.push_back(text[i + 1]);
          i += 2;
          continue;
        }
        if (d == '`') find(ParseErrorKind::SubstitutionDetected, "`");
        if (d == '$' && i + 1 < n && text[i + 1] == '(') find(ParseErrorKind::SubstitutionDetected, "$(...)");
        cur.push_back(d);
        ++i;
      }
      if (!closed) {
        find(ParseErrorKind::Malformed, "unterminated double quote");
        return r;
      }
      continue;
    }
    if (c == '\\' && i + 1 < n) {
      if (text[i + 1] == '\n') {  // line continuation
        i += 2;
        continue;
      }
      in_word = true;
      cur.push_back(text[i + 1]);
      i += 2;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      flush();
      ++i;
      continue;
    }
    if (c == '\n') {
      flush();
      if (text.find_first_not_of(" \t\r\n", i) != std::string_view::npos) find(ParseErrorKind::CompoundDetected, "\\n");
      ++i;
      continue;
    }
    if (c == '|') {
      flush();
      if (i + 1 < n && text[i + 1] == '|') {
        find(ParseErrorKind::CompoundDetected, "||");
        i += 2;
      } else {
        find(ParseErrorKind::PipeDetected, "|");
        ++i;
      }
      continue;
    }
    if (c == '&') {
      flush();
      if (i + 1 < n && text[i + 1] == '&') {
        find(ParseErrorKind::CompoundDetected, "&&");
        i += 2;
      } else {
        find(ParseErrorKind::CompoundDetected, "&");
        ++i;
      }
      continue;
    }
    if (c == ';') {
      flush();
      find(ParseErrorKind::CompoundDetected, ";");
      ++i;
      continue;
    }
    if (c == '`') {
      find(ParseErrorKind::SubstitutionDetected, "`");
      ++i;
      continue;
    }
    if (c == '$' && i + 1 < n && text[i + 1] == '(') {
      find(ParseErrorKind::SubstitutionDetected, "$(...)");
      in_word = true;
      cur.append("$(");
      i += 2;
      continue;
    }
    if (c == '(') {
      if (i + 1 < n && text[i + 1] == ')' && in_word && !cur.empty() &&
          std::all_of(cur.begin(), cur.end(), is_name_char)) {
        find(ParseErrorKind::FunctionDetected, cur + "()");
        cur += "()";
        i += 2;
        continue;
      }
      flush();
      find(ParseErrorKind::CompoundDetected, "(");
      ++i;
      continue;
    }
    if (c == ')') {
      flush();
      ++i;
      continue;
    }
    if (c == '<') {
      flush();
      if (i + 1 < n && text[i + 1] == '<') {
        // heredoc: <<[-]['"]DELIM['"] then body lines until DELIM
        std::size_t j = i + 2;
        if (j < n && text[j] == '<') {
          find(ParseErrorKind::StdinDetected, "<<<");
          return r;
        }
        if (j < n && text[j] == '-') ++j;
        while (j < n && (text[j] == ' ' || text[j] == '\t')) ++j;
        char q = (j < n && (text[j] == '\'' || text[j] == '"')) ? text[j] : 0;
        if (q) ++j;
        std::size_t ds = j;
        while (j < n && is_name_char(text[j])) ++j;
        std::string delim(text.substr(ds, j - ds));
        if (q) {
          if (j < n && text[j] == q) ++j;
        }
        if (delim.empty()) {
          find(ParseErrorKind::Malformed, "heredoc without delimiter");
          return r;
        }
        // Rest of the line belongs to the command.
        auto eol = text.find('\n', j);
        if (eol == std::string_view::npos) {
          find(ParseErrorKind::Malformed, "heredoc without body");
          return r;
        }
        std::string_view tail = text.substr(j, eol - j);
        auto sub = scan(tail);
        for (auto& w : sub.words) r.words.push_back(std::move(w));
        for (auto& f : sub.findings) r.findings.push_back(std::move(f));
        // Body.
        std::string body;
        std::size_t pos = eol + 1;
        bool closed = false;
        while (pos <= n) {
          auto next = text.find('\n', pos);
          std::string_view line = text.substr(pos, next == std::string_view::npos ? n - pos : next - pos);
          std::string_view trimmed = line;
          while (!trimmed.empty() && (trimmed.back() == '\r' || trimmed.back() == ' ')) trimmed.remove_suffix(1);
          while (!trimmed.empty() && (trimmed.front() == '\t' || trimmed.front() == ' ')) trimmed.remove_prefix(1);
          if (trimmed == delim) {
            closed = true;
            pos = next == std::string_view::npos ? n : next + 1;
            break;
          }
          body.append(line);
          body.push_back('\n');
          if (next == std::string_view::npos) break;
          pos = next + 1;
        }
        if (!closed) {
          find(ParseErrorKind::Malformed, "unterminated heredoc");
          return r;
        }
        r.heredoc_body = std::move(body);
        if (pos < n) {
          std::string_view after = text.substr(pos);
          if (after.find_first_not_of(" \t\r\n") != std::string_view::npos) {
            // Anything after the body is a second command.
            auto rest = scan(after);
            for (auto& f : rest.findings) r.findings.push_back(std::move(f));
            find(ParseErrorKind::CompoundDetected, "\\n");
          }
        }
        return r;
      }
      if (i + 1 < n && text[i + 1] == '(') {
        find(ParseErrorKind::SubstitutionDetected, "<(...)");
        i += 2;
        continue;
      }
      find(ParseErrorKind::StdinDetected, "<");
      ++i;
      continue;
    }
    if (c == '>') {
      flush();
      find(ParseErrorKind::Malformed, "output redirection is not supported");
      ++i;
      while (i < n && (text[i] == '>' || text[i] == '&')) ++i;
      continue;
    }
    in_word = true;
    cur.push_back(c);
    ++i;
  }
  flush();
  return r;
}

inline int priority(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::FunctionDetected: return 0;
    case ParseErrorKind::FlowControlDetected: return 1;
    case ParseErrorKind::SubstitutionDetected: return 2;
    case ParseErrorKind::CompoundDetected: return 3;
    case ParseErrorKind::PipeDetected: return 4;
    case ParseErrorKind::StdinDetected: return 5;
    case ParseErrorKind::Malformed: return 6;
  }
  return 7;
}

inline bool takes_value(std::string_view flag) {
  static constexpr std::array<std::string_view, 22> with_value = {
      "-n", "--namespace", "-f", "--filename", "-o", "--output", "-l", "--selector", "-p", "--patch", "--type",
      "--replicas", "--image", "--port", "-c", "--container", "--context", "--tail", "--timeout", "--grace-period",
      "--field-selector", "--sort-by"};
  return std::find(with_value.begin(), with_value.end(), flag) != with_value.end();
}

inline std::optional<Verb> verb_from(std::string_view w) {
  static const std::map<std::string, Verb, std::less<>> verbs = {
      {"get", Verb::Get},       {"describe", Verb::Describe}, {"logs", Verb::Logs},         {"apply", Verb::Apply},
      {"delete", Verb::Delete}, {"patch", Verb::Patch},       {"scale", Verb::Scale},       {"create", Verb::Create},
      {"cordon", Verb::Cordon}, {"uncordon", Verb::Uncordon}, {"exec", Verb::Exec},         {"edit", Verb::Edit},
      {"debug", Verb::Debug},   {"attach", Verb::Attach},
  };
  if (auto it = verbs.find(w); it != verbs.end()) return it->second;
  return std::nullopt;
}

}  // namespace detail

inline Expected<Command, ParseError> parse(std::string_view text) {
  auto malformed = [](std::string d) { return unexpected(ParseError{ParseErrorKind::Malformed, std::move(d)}); };

  // Trim surrounding whitespace.
  auto b = text.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return malformed("empty command");
  auto e = text.find_last_not_of(" \t\r\n");
  text = text.substr(b, e - b + 1);

  auto scanned = detail::scan(text);
  auto& words = scanned.words;

  static constexpr std::array<std::string_view, 14> flow = {"if",   "then", "elif", "else",  "fi",   "for", "while",
                                                            "until", "do",   "done", "case", "esac", "select", "[["};
  for (const auto& w : words) {
    if (w == "function" && &w == &words.front()) scanned.findings.push_back({ParseErrorKind::FunctionDetected, "function"});
    if (w == "{" || w == "}") scanned.findings.push_back({ParseErrorKind::FunctionDetected, w});
  }
  if (!words.empty() && std::find(flow.begin(), flow.end(), words.front()) != flow.end())
    scanned.findings.push_back({ParseErrorKind::FlowControlDetected, words.front()});
  // Flow keywords that follow a separator ("...; do ...") are also reported.
  for (std::size_t k = 1; k < words.size(); ++k) {
    if ((words[k] == "then" || words[k] == "do" || words[k] == "done" || words[k] == "fi" || words[k] == "esac") &&
        std::any_of(scanned.findings.begin(), scanned.findings.end(),
                    [](const ParseError& f) { return f.kind == ParseErrorKind::CompoundDetected; }))
      scanned.findings.push_back({ParseErrorKind::FlowControlDetected, words[k]});
  }

  if (!scanned.findings.empty()) {
    auto best = std::min_element(scanned.findings.begin(), scanned.findings.end(), [](const auto& x, const auto& y) {
      return detail::priority(x.kind) < detail::priority(y.kind);
    });
    return unexpected(*best);
  }

  std::size_t pos = 0;
  if (words.empty()) return malformed("empty command");
  if (words[0] == "kubectl") ++pos;
  if (pos >= words.size()) return malformed("missing verb");
  if (words[0] != "kubectl" && !detail::verb_from(words[0]) && words[0] != "rollout")
    return malformed("unsupported program: " + words[0]);

  Command cmd;
  cmd.text = std::string(text);
  const std::string& vw = words[pos++];
  if (vw == "rollout") {
    if (pos >= words.size() || words[pos] != "restart")
      return malformed("unsupported rollout subcommand: " + (pos < words.size() ? words[pos] : std::string("<none>")));
    ++pos;
    cmd.verb = Verb::RolloutRestart;
  } else if (auto v = detail::verb_from(vw)) {
    cmd.verb = *v;
  } else {
    return malformed("unsupported kubectl verb: " + vw);
  }

  std::vector<std::string> positionals;
  bool after_dashdash = false;
  for (; pos < words.size(); ++pos) {
    const std::string& w = words[pos];
    if (after_dashdash) {
      cmd.args.push_back(w);
      continue;
    }
    if (w == "--") {
      after_dashdash = true;
      continue;
    }
    if (w.size() > 1 && w[0] == '-') {
      if (auto eq = w.find('='); eq != std::string::npos && w.rfind("--", 0) == 0) {
        cmd.flags.push_back({w.substr(0, eq), w.substr(eq + 1)});
      } else if (detail::takes_value(w)) {
        if (pos + 1 >= words.size()) return malformed("flag " + w + " needs a value");
        cmd.flags.push_back({w, words[++pos]});
      } else {
        cmd.flags.push_back({w, std::nullopt});
      }
      continue;
    }
    positionals.push_back(w);
  }

  if (auto ns = cmd.flag_value({"-n", "--namespace"})) cmd.ns = *ns;

  // Resource addressing.
  auto split_slash = [](const std::string& tok) -> std::pair<std::string, std::optional<std::string>> {
    if (auto s = tok.find('/'); s != std::string::npos) return {tok.substr(0, s), tok.substr(s + 1)};
    return {tok, std::nullopt};
  };
  std::size_t pi = 0;
  switch (cmd.verb) {
    case Verb::Exec:
    case Verb::Attach:
    case Verb::Logs:
    case Verb::Debug: {
      cmd.kind = "pod";
      if (pi < positionals.size()) {
        auto [k, n] = split_slash(positionals[pi++]);
        if (n) {
          cmd.kind = canonical_kind(k);
          cmd.name = *n;
        } else {
          cmd.name = k;
        }
      }
      break;
    }
    case Verb::Cordon:
    case Verb::Uncordon: {
      cmd.kind = "node";
      if (pi >= positionals.size()) return malformed(std::string(to_string(cmd.verb)) + " requires a node name");
      auto [k, n] = split_slash(positionals[pi++]);
      cmd.name = n ? *n : k;
      break;
    }
    case Verb::Apply:
      break;
    default: {
      if (pi >= positionals.size()) {
        if (cmd.verb == Verb::Create && cmd.flag_value({"-f", "--filename"})) break;
        return malformed(std::string(to_string(cmd.verb)) + " requires a resource type");
      }
      auto [k, n] = split_slash(positionals[pi++]);
      cmd.kind = canonical_kind(k);
      if (n) {
        cmd.name = *n;
      } else if (pi < positionals.size()) {
        cmd.name = positionals[pi++];
      }
      break;
    }
  }
  for (; pi < positionals.size(); ++pi) cmd.args.push_back(positionals[pi]);

  if (scanned.heredoc_body) {
    if (cmd.verb != Verb::Apply && cmd.verb != Verb::Create) return malformed("heredoc input is only accepted for apply");
    if (cmd.flag_value({"-f", "--filename"}).value_or("") != "-") return malformed("heredoc requires -f -");
    try {
      cmd.manifest = parse_manifest(*scanned.heredoc_body);
    } catch (const ManifestError& ex) {
      return malformed(std::string("invalid manifest: ") + ex.what());
    }
    cmd.heredoc = true;
    cmd.kind = manifest_kind(*cmd.manifest);
    cmd.name = manifest_name(*cmd.manifest);
    auto mns = manifest_namespace(*cmd.manifest);
    if (!cmd.ns && !mns.empty()) cmd.ns = mns;
  }

  if (cmd.verb == Verb::Apply && !cmd.manifest) {
    auto f = cmd.flag_value({"-f", "--filename"});
    if (!f) return malformed("apply requires -f");
    if (*f != "-") return malformed("apply reads manifests inline only (-f - with a heredoc)");
    // bare "apply -f -" parses; the linter rejects it as stdin input
  }
  return cmd;
}

// Renders a command in the canonical form produced by inverse synthesis.
struct CommandSpec {
  Verb verb;
  std::string kind;
  std::string name;
  std::optional<std::string> ns;
  std::vector<Flag> flags;
  std::optional<Manifest> manifest;
};

inline std::string shell_quote(const std::string& s) {
  bool plain = !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '/' || c == ':' || c == '=' || c == ',';
  });
  if (plain) return s;
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out.push_back(c);
  }
  return out + "'";
}

inline std::string render(const CommandSpec& spec) {
  std::string out = "kubectl ";
  if (spec.manifest) {
    out += std::string(to_string(spec.verb)) + " -f - <<EOF\n" + render_manifest(*spec.manifest) + "EOF";
    return out;
  }
  out += std::string(to_string(spec.verb));
  if (spec.verb != Verb::Cordon && spec.verb != Verb::Uncordon) out += " " + spec.kind;
  if (!spec.name.empty()) out += " " + spec.name;
  if (spec.ns) out += " -n " + *spec.ns;
  for (const auto& f : spec.flags) {
    out += " " + f.name;
    if (f.value) out += (f.name.rfind("--", 0) == 0 ? "=" : " ") + shell_quote(*f.value);
  }
  return out;
}

inline Command make_command(const CommandSpec& spec) {
  auto text = render(spec);
  auto parsed = parse(text);
  if (!parsed) throw std::logic_error("rendered command does not parse: " + text + " (" + parsed.error().detail + ")");
  return std::move(parsed).value();
}

}  // namespace tnr
