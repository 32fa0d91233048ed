#pragma once

#include <vector>

#include "mapfast/grid.hpp"
#include "mapfast/pathfinding.hpp"

namespace mapfast {

enum class ConflictKind { Vertex, Edge };

// For edge conflicts `first` moves from -> to and `second` moves to -> from
// between time-1 and time. For vertex conflicts both are at `from`.
struct ConflictRecord {
  ConflictKind kind = ConflictKind::Vertex;
  int first = 0;
  int second = 0;
  int time = 0;
  Coord from;
  Coord to;

  friend bool operator==(const ConflictRecord&, const ConflictRecord&) = default;
};

// All vertex and swap conflicts, ordered by time; within a timestep vertex
// conflicts come before edge conflicts and pairs are in (i, j) order.
// Throws std::invalid_argument if a path's endpoints do not match its task
// or it makes an illegal move.
std::vector<ConflictRecord> validate_solution(const MapfInstance& instance,
                                              const std::vector<Path>& paths);

// Same scan without endpoint checks. With `first_only` stops at the earliest.
std::vector<ConflictRecord> find_conflicts(const std::vector<Path>& paths, bool first_only = false);

}  // namespace mapfast
