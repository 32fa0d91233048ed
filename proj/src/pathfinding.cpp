#include "mapfast/pathfinding.hpp"

#include <algorithm>
#include <deque>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace mapfast {

DistanceField distance_field(const GridMap& map, Coord goal) {
  if (!map.passable(goal)) throw std::invalid_argument("distance field goal is not passable");
  std::vector<int> dist(map.cell_count(), DistanceField::kUnreachable);
  std::deque<int> queue;
  const int g = map.index(goal);
  dist[g] = 0;
  queue.push_back(g);
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    int nb[4];
    int n = map.neighbors(v, nb);
    for (int k = 0; k < n; ++k) {
      if (dist[nb[k]] == DistanceField::kUnreachable) {
        dist[nb[k]] = dist[v] + 1;
        queue.push_back(nb[k]);
      }
    }
  }
  return DistanceField(goal, map.width(), std::move(dist));
}

Path shortest_path(const GridMap& map, Coord start, const DistanceField& to_goal) {
  if (!map.passable(start)) throw std::invalid_argument("shortest path start is not passable");
  if (!to_goal.reachable(start)) throw std::invalid_argument("start and goal are disconnected");
  Path path;
  int v = map.index(start);
  path.cells.push_back(start);
  while (to_goal.at(v) > 0) {
    int nb[4];
    int n = map.neighbors(v, nb);
    for (int k = 0; k < n; ++k) {
      if (to_goal.at(nb[k]) == to_goal.at(v) - 1) {
        v = nb[k];
        break;
      }
    }
    path.cells.push_back(map.coord(v));
  }
  return path;
}

Path shortest_path(const GridMap& map, Coord start, Coord goal) {
  return shortest_path(map, start, distance_field(map, goal));
}

int default_horizon(const GridMap& map, std::span<const Constraint> constraints) {
  int latest = 0;
  for (const auto& c : constraints) latest = std::max(latest, c.time);
  return map.free_count() + latest;
}

namespace {

struct Node {
  int cell;
  int time;
  int parent;
};

struct OpenEntry {
  int f;
  int h;
  std::uint64_t seq;
  int node;

  bool operator>(const OpenEntry& o) const {
    if (f != o.f) return f > o.f;
    if (h != o.h) return h > o.h;
    return seq > o.seq;
  }
};

}  // namespace

std::optional<Path> spacetime_astar(const GridMap& map, const AgentTask& task,
                                    std::span<const Constraint> constraints, int horizon,
                                    const DistanceField* heuristic, SearchStats* stats) {
  DistanceField own;
  if (heuristic == nullptr) {
    own = distance_field(map, task.goal);
    heuristic = &own;
  }
  if (!map.passable(task.start)) throw std::invalid_argument("start is not passable");
  const int lower_bound = heuristic->at(task.start);
  if (lower_bound == DistanceField::kUnreachable) return std::nullopt;
  if (horizon < lower_bound) {
    throw std::invalid_argument("horizon " + std::to_string(horizon) + " below distance lower bound " +
                                std::to_string(lower_bound));
  }

  const std::uint64_t cells = static_cast<std::uint64_t>(map.cell_count());
  const int goal = map.index(task.goal);
  std::unordered_set<std::uint64_t> vertex_blocked;
  std::unordered_set<std::uint64_t> edge_blocked;
  int last_goal_block = -1;
  for (const auto& c : constraints) {
    if (c.agent != task.id) throw std::invalid_argument("constraint references another agent");
    if (c.kind == ConstraintKind::Vertex) {
      vertex_blocked.insert(static_cast<std::uint64_t>(c.time) * cells + map.index(c.cell));
      if (map.index(c.cell) == goal) last_goal_block = std::max(last_goal_block, c.time);
    } else {
      edge_blocked.insert((static_cast<std::uint64_t>(c.time) * cells + map.index(c.cell)) * cells +
                          map.index(c.to));
    }
  }

  std::vector<Node> nodes;
  std::unordered_set<std::uint64_t> seen;
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, std::greater<>> open;
  std::uint64_t seq = 0;

  const int start = map.index(task.start);
  if (vertex_blocked.count(start)) return std::nullopt;  // time 0
  nodes.push_back({start, 0, -1});
  seen.insert(start);
  open.push({lower_bound, lower_bound, seq++, 0});

  while (!open.empty()) {
    const OpenEntry top = open.top();
    open.pop();
    const Node cur = nodes[top.node];
    if (stats) ++stats->expansions;
    if (cur.cell == goal && cur.time > last_goal_block) {
      Path path;
      path.cells.resize(cur.time + 1);
      for (int i = top.node; i >= 0; i = nodes[i].parent) {
        path.cells[nodes[i].time] = map.coord(nodes[i].cell);
      }
      return path;
    }
    const int t = cur.time + 1;
    if (t > horizon) continue;
    int succ[5];
    int n = map.neighbors(cur.cell, succ);
    succ[n++] = cur.cell;
    for (int k = 0; k < n; ++k) {
      const int next = succ[k];
      const int h = heuristic->at(next);
      if (h == DistanceField::kUnreachable || t + h > horizon) continue;
      const std::uint64_t key = static_cast<std::uint64_t>(t) * cells + next;
      if (vertex_blocked.count(key)) continue;
      if (!edge_blocked.empty() && edge_blocked.count((static_cast<std::uint64_t>(t) * cells + cur.cell) * cells + next)) {
        continue;
      }
      if (!seen.insert(key).second) continue;
      nodes.push_back({next, t, top.node});
      open.push({t + h, h, seq++, static_cast<int>(nodes.size()) - 1});
    }
  }
  return std::nullopt;
}

}  // namespace mapfast
