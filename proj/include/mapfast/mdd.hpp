#pragma once

#include <span>
#include <vector>

#include "mapfast/grid.hpp"
#include "mapfast/pathfinding.hpp"

namespace mapfast {

// Multi-value decision diagram: every (cell, t) lying on some start->goal
// path of exactly `cost` timesteps. Level t holds the cells (sorted by cell
// index); children[t][i] indexes the successors of levels[t][i] in level t+1.
struct Mdd {
  int agent = 0;
  int cost = 0;
  std::vector<std::vector<Coord>> levels;
  std::vector<std::vector<std::vector<int>>> children;

  bool empty() const { return levels.empty() || levels.front().empty(); }
  std::size_t node_count() const;

  // Cells available at time t; past `cost` the agent is parked at its goal.
  const std::vector<Coord>& level(int t) const {
    return levels[t < cost ? t : cost];
  }
  bool is_singleton(int t, Coord cell) const {
    const auto& l = level(t);
    return l.size() == 1 && l.front() == cell;
  }
};

// Throws std::invalid_argument when cost is below the shortest distance.
// With constraints the diagram keeps only paths that satisfy them and may be
// empty.
Mdd build_mdd(const GridMap& map, const AgentTask& task, int cost,
              std::span<const Constraint> constraints = {}, const DistanceField* to_goal = nullptr);

}  // namespace mapfast
