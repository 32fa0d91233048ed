#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mapfast/pathfinding.hpp"

namespace mapfast {

enum class SolveStatus { Solved, Timeout, Infeasible, Error };

std::string to_string(SolveStatus status);
SolveStatus status_from_string(const std::string& name);

struct SolveStats {
  std::uint64_t expansions = 0;      // low-level or joint-state expansions
  std::uint64_t high_level_nodes = 0;
  std::uint64_t sat_calls = 0;
  std::uint64_t sat_variables = 0;   // of the last encoding
  std::uint64_t sat_clauses = 0;
  std::uint64_t work = 0;            // units charged to the budget
};

struct SolveResult {
  SolveStatus status = SolveStatus::Timeout;
  std::vector<Path> paths;
  int sum_of_costs = 0;
  double runtime_seconds = 0.0;
  SolveStats stats;
  std::string diagnostic;

  bool solved() const { return status == SolveStatus::Solved; }
};

}  // namespace mapfast
