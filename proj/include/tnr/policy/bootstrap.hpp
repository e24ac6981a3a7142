#pragma once

#include <string>
#include <vector>

#include "tnr/workload.hpp"

namespace tnr {

struct Suspect {
  std::string service;    // last service reached before the error
  std::string operation;  // downstream service it was invoking
  int count = 0;

  friend bool operator==(const Suspect&, const Suspect&) = default;
};

// Ranks the failing call edges by how many traces end on them. Ties keep
// the order in which the edges first appear. Empty when nothing failed.
inline std::vector<Suspect> bootstrap_localize(const std::vector<Trace>& traces) {
  std::vector<Suspect> ranked;
  for (const auto& t : traces) {
    for (const auto& s : t.spans) {
      if (!s.error) continue;
      auto it = std::find_if(ranked.begin(), ranked.end(),
                             [&](const Suspect& x) { return x.service == s.service && x.operation == s.operation; });
      if (it == ranked.end())
        ranked.push_back({s.service, s.operation, 1});
      else
        ++it->count;
      break;
    }
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const Suspect& a, const Suspect& b) { return a.count > b.count; });
  return ranked;
}

}  // namespace tnr
