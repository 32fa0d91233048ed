#include "mapfast/conflicts.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace mapfast {

std::vector<ConflictRecord> find_conflicts(const std::vector<Path>& paths, bool first_only) {
  std::vector<ConflictRecord> out;
  int horizon = 0;
  for (const auto& p : paths) horizon = std::max(horizon, p.cost());
  const int n = static_cast<int>(paths.size());
  for (int t = 0; t <= horizon; ++t) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (paths[i].at(t) == paths[j].at(t)) {
          out.push_back({ConflictKind::Vertex, i, j, t, paths[i].at(t), paths[i].at(t)});
          if (first_only) return out;
        }
      }
    }
    if (t == 0) continue;
    for (int i = 0; i < n; ++i) {
      const Coord a0 = paths[i].at(t - 1);
      const Coord a1 = paths[i].at(t);
      if (a0 == a1) continue;
      for (int j = i + 1; j < n; ++j) {
        if (paths[j].at(t - 1) == a1 && paths[j].at(t) == a0) {
          out.push_back({ConflictKind::Edge, i, j, t, a0, a1});
          if (first_only) return out;
        }
      }
    }
  }
  return out;
}

std::vector<ConflictRecord> validate_solution(const MapfInstance& instance, const std::vector<Path>& paths) {
  if (paths.size() != instance.agents.size()) {
    throw std::invalid_argument("expected one path per agent");
  }
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto& p = paths[i];
    if (p.cells.empty() || p.cells.front() != instance.agents[i].start ||
        p.cells.back() != instance.agents[i].goal) {
      throw std::invalid_argument("path " + std::to_string(i) + " endpoints do not match its task");
    }
    for (std::size_t t = 0; t < p.cells.size(); ++t) {
      if (!instance.map.passable(p.cells[t])) {
        throw std::invalid_argument("path " + std::to_string(i) + " enters a blocked cell");
      }
      if (t > 0 && std::abs(p.cells[t].col - p.cells[t - 1].col) + std::abs(p.cells[t].row - p.cells[t - 1].row) > 1) {
        throw std::invalid_argument("path " + std::to_string(i) + " makes a non-adjacent move");
      }
    }
  }
  return find_conflicts(paths);
}

}  // namespace mapfast
