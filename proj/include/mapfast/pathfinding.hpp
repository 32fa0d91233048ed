#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "mapfast/grid.hpp"

namespace mapfast {

// Timed sequence of cells; cells[t] is the position at timestep t.
// After the last cell the agent waits at its goal.
struct Path {
  std::vector<Coord> cells;

  int cost() const { return static_cast<int>(cells.size()) - 1; }
  Coord at(int t) const { return t < static_cast<int>(cells.size()) ? cells[t] : cells.back(); }

  friend bool operator==(const Path&, const Path&) = default;
};

enum class ConstraintKind { Vertex, Edge };

// Forbids `agent` from occupying `cell` at `time` (vertex), or from moving
// cell -> to between time-1 and time (edge).
struct Constraint {
  int agent = 0;
  ConstraintKind kind = ConstraintKind::Vertex;
  Coord cell;
  Coord to;
  int time = 1;

  static Constraint vertex(int agent, Coord cell, int time) {
    return {agent, ConstraintKind::Vertex, cell, cell, time};
  }
  static Constraint edge(int agent, Coord from, Coord to, int time) {
    return {agent, ConstraintKind::Edge, from, to, time};
  }

  friend bool operator==(const Constraint&, const Constraint&) = default;
};

class DistanceField {
 public:
  static constexpr int kUnreachable = std::numeric_limits<int>::max();

  DistanceField() = default;
  DistanceField(Coord goal, int width, std::vector<int> dist)
      : goal_(goal), width_(width), dist_(std::move(dist)) {}

  Coord goal() const { return goal_; }
  int at(Coord c) const { return dist_[c.row * width_ + c.col]; }
  int at(int cell) const { return dist_[cell]; }
  bool reachable(Coord c) const { return at(c) != kUnreachable; }

 private:
  Coord goal_;
  int width_ = 0;
  std::vector<int> dist_;
};

// Exact BFS distances to `goal` on the 4-connected grid.
DistanceField distance_field(const GridMap& map, Coord goal);

// Single shortest path; at every step takes the first neighbor in the order
// up, left, right, down that reduces the distance to the goal.
Path shortest_path(const GridMap& map, Coord start, Coord goal);
Path shortest_path(const GridMap& map, Coord start, const DistanceField& to_goal);

struct SearchStats {
  std::uint64_t expansions = 0;
};

// Free-cell count plus the latest constraint time.
int default_horizon(const GridMap& map, std::span<const Constraint> constraints);

// Minimum-cost timed path for one agent that respects all constraints and
// stays at its goal after arrival. Returns nullopt when no such path exists
// within `horizon` timesteps. `heuristic` must be the goal's distance field
// when supplied.
std::optional<Path> spacetime_astar(const GridMap& map, const AgentTask& task,
                                    std::span<const Constraint> constraints, int horizon,
                                    const DistanceField* heuristic = nullptr,
                                    SearchStats* stats = nullptr);

}  // namespace mapfast
