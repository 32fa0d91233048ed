#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <set>
#include <vector>

#include "mapfast/encoding.hpp"
#include "mapfast/grid.hpp"

namespace mapfast::testing {

inline MapfInstance make_instance(GridMap map, const std::vector<std::pair<Coord, Coord>>& tasks) {
  MapfInstance inst;
  inst.map = std::move(map);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    inst.agents.push_back({static_cast<int>(i), tasks[i].first, tasks[i].second});
  }
  return inst;
}

// Six-code table applied cell by cell from raw membership flags.
inline CellCode reference_code(bool obstacle, bool start, bool goal, bool on_path) {
  if (obstacle) return {0, 0, 0};
  if (start && goal) return {0, 1, 1};
  if (start) return {0, 1, 0};
  if (goal) return {0, 0, 1};
  if (on_path) return {1, 0, 0};
  return {1, 1, 1};
}

// Number of tensor cells whose code disagrees with the reference table.
inline int code_discrepancies(const MapfInstance& inst, const std::vector<Path>& paths, const InstanceTensor& t) {
  const int ox = (t.width - inst.map.width()) / 2;
  const int oy = (t.height - inst.map.height()) / 2;
  std::set<Coord> starts, goals, path_cells;
  for (const auto& a : inst.agents) {
    starts.insert(a.start);
    goals.insert(a.goal);
  }
  for (const auto& p : paths) path_cells.insert(p.cells.begin(), p.cells.end());
  int bad = 0;
  for (int r = 0; r < t.height; ++r) {
    for (int c = 0; c < t.width; ++c) {
      const Coord local{c - ox, r - oy};
      const bool inside = inst.map.in_bounds(local);
      const CellCode expected = reference_code(!inside || !inst.map.passable(local), inside && starts.count(local),
                                               inside && goals.count(local), inside && path_cells.count(local));
      if (t.code({c, r}) != expected) ++bad;
    }
  }
  return bad;
}

}  // namespace mapfast::testing
