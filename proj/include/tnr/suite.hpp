#pragma once

#include <nlohmann/json.hpp>

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tnr/orchestrator.hpp"
#include "tnr/policy/playbook.hpp"

namespace tnr {

using PolicyFactory = std::function<std::unique_ptr<Policy>(const Scenario&)>;

// Scripted policy from the scenario's playbook file. A scenario without a
// playbook gets an empty one, which is enough for detection-only cases.
inline std::unique_ptr<Policy> playbook_policy(const Scenario& sc) {
  if (sc.playbook.empty()) return std::make_unique<PlaybookPolicy>(Playbook{sc.id, {}});
  return std::make_unique<PlaybookPolicy>(load_playbook(sc.playbook_path()));
}

struct SuiteReport {
  std::vector<EpisodeReport> episodes;
  std::optional<double> success_rate;  // undefined for an empty suite
  double mean_steps = 0;
  double mean_wall_ms = 0;
  std::map<int, int> retry_histogram;  // retries used -> episode count

  int solved() const {
    int n = 0;
    for (const auto& e : episodes) n += e.solved;
    return n;
  }
};

// Aggregates computed only from the per-episode rows.
inline SuiteReport aggregate(std::vector<EpisodeReport> eps) {
  SuiteReport r;
  r.episodes = std::move(eps);
  if (r.episodes.empty()) return r;
  double steps = 0, ms = 0;
  for (const auto& e : r.episodes) {
    steps += e.steps;
    ms += e.wall_ms;
    ++r.retry_histogram[e.retries];
  }
  const double n = static_cast<double>(r.episodes.size());
  r.success_rate = r.solved() / n;
  r.mean_steps = steps / n;
  r.mean_wall_ms = ms / n;
  return r;
}

inline SuiteReport run_suite(const std::vector<Scenario>& scenarios, const RunConfig& cfg,
                             const PolicyFactory& make_policy = playbook_policy) {
  std::vector<EpisodeReport> eps;
  for (const auto& sc : scenarios) {
    auto policy = make_policy(sc);
    eps.push_back(run_episode(sc, *policy, cfg));
  }
  return aggregate(std::move(eps));
}

struct SweepRow {
  int limit = 0;
  int solved = 0;
  int total = 0;
  double success_rate = 0;
};

inline std::vector<SweepRow> sweep_step_limit(const std::vector<Scenario>& scenarios, const std::vector<int>& limits,
                                              RunConfig cfg, const PolicyFactory& make_policy = playbook_policy) {
  if (!std::is_sorted(limits.begin(), limits.end())) throw std::invalid_argument("limits must be ascending");
  std::vector<SweepRow> rows;
  for (int limit : limits) {
    cfg.step_limit = limit;
    auto rep = run_suite(scenarios, cfg, make_policy);
    rows.push_back({limit, rep.solved(), static_cast<int>(rep.episodes.size()), rep.success_rate.value_or(0.0)});
  }
  return rows;
}

inline std::vector<Scenario> load_corpus(const std::string& dir) {
  std::vector<Scenario> out;
  for (const auto& f : scenario_files(dir)) out.push_back(load_scenario(f));
  return out;
}

inline nlohmann::json to_json(const SuiteReport& r) {
  nlohmann::json eps = nlohmann::json::array();
  for (const auto& e : r.episodes) eps.push_back(to_json(e));
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [k, v] : r.retry_histogram) hist[std::to_string(k)] = v;
  return {{"episodes", eps},
          {"count", r.episodes.size()},
          {"solved", r.solved()},
          {"success_rate", r.success_rate ? nlohmann::json(*r.success_rate) : nlohmann::json(nullptr)},
          {"mean_steps", r.mean_steps},
          {"mean_wall_ms", r.mean_wall_ms},
          {"retry_histogram", hist}};
}

inline nlohmann::json to_json(const std::vector<SweepRow>& rows) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows)
    j.push_back({{"limit", r.limit}, {"solved", r.solved}, {"total", r.total}, {"success_rate", r.success_rate}});
  return j;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "limit,solved,total,success_rate\n";
  for (const auto& r : rows) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%d,%d,%d,%.4f\n", r.limit, r.solved, r.total, r.success_rate);
    out += buf;
  }
  return out;
}

}  // namespace tnr
