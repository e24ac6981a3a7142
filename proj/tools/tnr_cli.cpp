#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "tnr/tnr.hpp"

namespace {

struct Options {
  std::string ablation = "full";
  std::uint64_t seed = 7;
  std::string weights = "1,1,1";
  std::string report;
  std::string audit;
  int K = 20;
  int retry_limit = 9;
  int step_limit = 0;
  bool no_dropout = false;
  std::string policy = "playbook";
  std::string external;
  int external_timeout_ms = 5000;
};

void add_common(CLI::App* app, Options& o) {
  app->add_option("--ablation", o.ablation, "full | noretry | naive")
      ->check(CLI::IsMember({"full", "noretry", "naive"}));
  app->add_option("--seed", o.seed, "probe and policy seed");
  app->add_option("--weights", o.weights, "severity weights w1,w2,w3");
  app->add_option("--report", o.report, "write the JSON report here (- for stdout)");
  app->add_option("--K", o.K, "risk window per transaction")->check(CLI::PositiveNumber);
  app->add_option("--retry-limit", o.retry_limit, "maximum retries per episode")->check(CLI::NonNegativeNumber);
  app->add_option("--step-limit", o.step_limit, "maximum mitigation commands per episode (0 = none)");
  app->add_flag("--no-dropout", o.no_dropout, "keep policy memory between rounds");
  app->add_option("--policy", o.policy, "playbook | random | external")
      ->check(CLI::IsMember({"playbook", "random", "external"}));
  app->add_option("--external", o.external, "command line of the external policy process");
  app->add_option("--external-timeout-ms", o.external_timeout_ms, "external policy response timeout");
}

tnr::RunConfig make_config(const Options& o) {
  tnr::RunConfig c;
  c.ablation = *tnr::ablation_from(o.ablation);
  c.seed = o.seed;
  c.weights = tnr::SeverityWeights::parse(o.weights);
  c.K = o.K;
  c.retry_limit = o.retry_limit;
  if (o.step_limit > 0) c.step_limit = o.step_limit;
  c.thought_dropout = !o.no_dropout;
  return c;
}

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

tnr::PolicyFactory make_factory(const Options& o) {
  if (o.policy == "random") {
    auto seed = o.seed;
    auto K = o.K;
    return [seed, K](const tnr::Scenario&) { return std::make_unique<tnr::RandomPolicy>(seed, K); };
  }
  if (o.policy == "external") {
    if (o.external.empty()) throw std::invalid_argument("--policy external needs --external");
    auto argv = split_words(o.external);
    auto timeout = o.external_timeout_ms;
    return [argv, timeout](const tnr::Scenario&) { return std::make_unique<tnr::ExternalPolicy>(argv, timeout); };
  }
  return tnr::playbook_policy;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) return;
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string trajectory(const tnr::EpisodeReport& r) {
  std::string s;
  for (std::size_t i = 0; i < r.visible.size(); ++i) s += (i ? " " : "") + r.visible[i].to_string();
  return s;
}

void print_row(const tnr::EpisodeReport& r) {
  std::printf("%-36s %-8s %-18s b=%-5s retries=%d steps=%d visible=[%s]\n", r.scenario_id.c_str(),
              r.solved ? "solved" : "unsolved", std::string(tnr::to_string(r.termination)).c_str(),
              r.baseline.to_string().c_str(), r.retries, r.steps, trajectory(r).c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transactional no-regression harness over a simulated cluster"};
  app.require_subcommand(1);

  Options o;
  std::string scenario_path, dir, limits_text = "3,5,10,15,20,30", csv_path, lint_text, role = "writer";
  bool canon_check = false;

  auto* run = app.add_subcommand("run", "run one scenario");
  run->add_option("scenario", scenario_path, "scenario file")->required()->check(CLI::ExistingFile);
  add_common(run, o);
  run->add_option("--audit", o.audit, "write the JSONL audit log here");

  auto* suite = app.add_subcommand("suite", "run every scenario in a directory");
  suite->add_option("dir", dir, "scenario directory")->required()->check(CLI::ExistingDirectory);
  add_common(suite, o);

  auto* sweep = app.add_subcommand("sweep", "success rate per step limit");
  sweep->add_option("dir", dir, "scenario directory")->check(CLI::ExistingDirectory)->default_val("scenarios");
  sweep->add_option("--limits", limits_text, "ascending step limits, comma separated");
  sweep->add_option("--csv", csv_path, "also write the table as CSV");
  add_common(sweep, o);

  auto* canon = app.add_subcommand("canon", "print a scenario in canonical form");
  canon->add_option("scenario", scenario_path, "scenario file")->required()->check(CLI::ExistingFile);
  canon->add_flag("--check", canon_check, "exit 1 unless the file is already canonical");

  auto* lint = app.add_subcommand("lint", "check a command against the confinement rules");
  lint->add_option("command", lint_text, "command text")->required();
  lint->add_option("--role", role, "reader | writer")->check(CLI::IsMember({"reader", "writer"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // usage errors share the exit status of other input errors
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      auto sc = tnr::load_scenario(scenario_path);
      auto policy = make_factory(o)(sc);
      tnr::AuditLog audit;
      auto rep = tnr::run_episode(sc, *policy, make_config(o), &audit);
      print_row(rep);
      emit(o.report, to_json(rep).dump(2) + "\n");
      emit(o.audit, audit.to_jsonl());
      return rep.solved ? 0 : 1;
    }
    if (*suite) {
      auto rep = tnr::run_suite(tnr::load_corpus(dir), make_config(o), make_factory(o));
      for (const auto& e : rep.episodes) print_row(e);
      if (rep.success_rate)
        std::printf("success %d/%zu (%.1f%%), mean steps %.2f\n", rep.solved(), rep.episodes.size(),
                    100.0 * *rep.success_rate, rep.mean_steps);
      else
        std::printf("empty suite: success rate undefined\n");
      std::printf("retry histogram:");
      for (const auto& [k, v] : rep.retry_histogram) std::printf(" %d:%d", k, v);
      std::printf("\n");
      emit(o.report, to_json(rep).dump(2) + "\n");
      return 0;
    }
    if (*sweep) {
      std::vector<int> limits;
      std::stringstream ss(limits_text);
      for (std::string tok; std::getline(ss, tok, ',');) limits.push_back(std::stoi(tok));
      auto rows = tnr::sweep_step_limit(tnr::load_corpus(dir), limits, make_config(o), make_factory(o));
      std::fputs(tnr::sweep_csv(rows).c_str(), stdout);
      emit(o.report, to_json(rows).dump(2) + "\n");
      emit(csv_path, tnr::sweep_csv(rows));
      return 0;
    }
    if (*canon) {
      std::ifstream in(scenario_path);
      std::stringstream ss;
      ss << in.rdbuf();
      auto text = tnr::serialize_scenario(tnr::parse_scenario(ss.str()));
      if (canon_check) return text == ss.str() ? 0 : 1;
      std::cout << text;
      return 0;
    }
    if (*lint) {
      auto v = tnr::check(lint_text, role == "reader" ? tnr::Role::ReadOnly : tnr::Role::Writer);
      std::cout << (v.allowed ? "allowed" : v.reason) << "\n";
      return v.allowed ? 0 : 1;
    }
  } catch (const tnr::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
