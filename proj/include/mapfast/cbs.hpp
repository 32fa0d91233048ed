#pragma once

#include <functional>

#include "mapfast/budget.hpp"
#include "mapfast/conflicts.hpp"
#include "mapfast/grid.hpp"
#include "mapfast/solve_result.hpp"

namespace mapfast {

enum class Cardinality { Cardinal, SemiCardinal, NonCardinal };

struct CbsOptions {
  // CBSH: classify conflicts with MDDs, split cardinal ones first and add
  // the greedy matching size of the cardinal conflict graph as h.
  bool cardinal_heuristic = false;
  // Called for every expanded constraint-tree node with (cost, h).
  std::function<void(int, int)> on_expand;
};

SolveResult solve_cbs(const MapfInstance& instance, double budget_seconds, ClockKind clock = ClockKind::Wall);
SolveResult solve_cbsh(const MapfInstance& instance, double budget_seconds, ClockKind clock = ClockKind::Wall);

// Best-first constraint-tree search, ties broken by insertion order.
SolveResult run_cbs(const MapfInstance& instance, Budget& budget, const CbsOptions& options);

// h of the CBSH root node.
int cbsh_root_heuristic(const MapfInstance& instance);

}  // namespace mapfast
