#include "mapfast/mdd.hpp"

#include <stdexcept>
#include <string>
#include <unordered_set>

namespace mapfast {

std::size_t Mdd::node_count() const {
  std::size_t n = 0;
  for (const auto& l : levels) n += l.size();
  return n;
}

Mdd build_mdd(const GridMap& map, const AgentTask& task, int cost, std::span<const Constraint> constraints,
              const DistanceField* to_goal) {
  DistanceField own;
  if (to_goal == nullptr) {
    own = distance_field(map, task.goal);
    to_goal = &own;
  }
  const int lower = to_goal->at(task.start);
  if (lower == DistanceField::kUnreachable) throw std::invalid_argument("goal unreachable from start");
  if (cost < lower) {
    throw std::invalid_argument("MDD cost " + std::to_string(cost) + " below shortest distance " +
                                std::to_string(lower));
  }

  const std::uint64_t cells = static_cast<std::uint64_t>(map.cell_count());
  const int goal = map.index(task.goal);
  std::unordered_set<std::uint64_t> vertex_blocked;
  std::unordered_set<std::uint64_t> edge_blocked;
  bool goal_blocked_later = false;
  for (const auto& c : constraints) {
    if (c.agent != task.id) continue;
    if (c.kind == ConstraintKind::Vertex) {
      vertex_blocked.insert(static_cast<std::uint64_t>(c.time) * cells + map.index(c.cell));
      if (map.index(c.cell) == goal && c.time > cost) goal_blocked_later = true;
    } else {
      edge_blocked.insert((static_cast<std::uint64_t>(c.time) * cells + map.index(c.cell)) * cells +
                          map.index(c.to));
    }
  }
  auto vertex_ok = [&](int cell, int t) {
    return !vertex_blocked.count(static_cast<std::uint64_t>(t) * cells + cell);
  };
  auto edge_ok = [&](int from, int to, int t) {
    return edge_blocked.empty() ||
           !edge_blocked.count((static_cast<std::uint64_t>(t) * cells + from) * cells + to);
  };

  Mdd mdd;
  mdd.agent = task.id;
  mdd.cost = cost;
  const int start = map.index(task.start);
  if (goal_blocked_later || !vertex_ok(start, 0)) {
    mdd.levels.assign(cost + 1, {});
    mdd.children.assign(cost, {});
    return mdd;
  }

  // Forward reachability, pruned by remaining distance.
  std::vector<std::vector<int>> forward(cost + 1);
  forward[0].push_back(start);
  std::vector<int> mark(map.cell_count(), -1);
  for (int t = 0; t < cost; ++t) {
    for (int v : forward[t]) {
      int succ[5];
      int n = map.neighbors(v, succ);
      succ[n++] = v;
      for (int k = 0; k < n; ++k) {
        const int w = succ[k];
        if (mark[w] == t + 1) continue;
        if (t + 1 + to_goal->at(w) > cost) continue;
        if (!vertex_ok(w, t + 1) || !edge_ok(v, w, t + 1)) continue;
        mark[w] = t + 1;
        forward[t + 1].push_back(w);
      }
    }
  }

  // Backward pass keeps nodes that still reach the goal at `cost`.
  std::vector<std::vector<char>> alive(cost + 1, std::vector<char>(map.cell_count(), 0));
  for (int v : forward[cost]) {
    if (v == goal) alive[cost][v] = 1;
  }
  for (int t = cost - 1; t >= 0; --t) {
    for (int v : forward[t]) {
      int succ[5];
      int n = map.neighbors(v, succ);
      succ[n++] = v;
      for (int k = 0; k < n; ++k) {
        if (alive[t + 1][succ[k]] && edge_ok(v, succ[k], t + 1)) {
          alive[t][v] = 1;
          break;
        }
      }
    }
  }

  mdd.levels.resize(cost + 1);
  std::vector<std::vector<int>> level_cells(cost + 1);
  for (int t = 0; t <= cost; ++t) {
    for (int c = 0; c < map.cell_count(); ++c) {
      if (alive[t][c]) level_cells[t].push_back(c);
    }
    for (int c : level_cells[t]) mdd.levels[t].push_back(map.coord(c));
  }
  mdd.children.resize(cost);
  std::vector<int> position(map.cell_count(), -1);
  for (int t = 0; t < cost; ++t) {
    for (std::size_t i = 0; i < level_cells[t + 1].size(); ++i) position[level_cells[t + 1][i]] = static_cast<int>(i);
    mdd.children[t].resize(level_cells[t].size());
    for (std::size_t i = 0; i < level_cells[t].size(); ++i) {
      const int v = level_cells[t][i];
      int succ[5];
      int n = map.neighbors(v, succ);
      succ[n++] = v;
      for (int k = 0; k < n; ++k) {
        if (alive[t + 1][succ[k]] && edge_ok(v, succ[k], t + 1)) {
          mdd.children[t][i].push_back(position[succ[k]]);
        }
      }
    }
    for (int c : level_cells[t + 1]) position[c] = -1;
  }
  return mdd;
}

}  // namespace mapfast
