#pragma once

#include "mapfast/budget.hpp"
#include "mapfast/grid.hpp"
#include "mapfast/solve_result.hpp"

namespace mapfast {

// Optimal sum-of-costs by best-first search over joint configurations.
// Each agent carries a "finished" flag it may set while standing on its
// goal, after which it is pinned there; every step costs the number of
// unfinished agents. The heuristic is the sum of unfinished agents' goal
// distances (consistent, so the first goal popped is optimal). Reports
// Infeasible when the reachable joint space is exhausted.
//
// Intended for a handful of agents on small maps; throws
// std::invalid_argument if a joint state does not pack into 64 bits.
SolveResult joint_state_oracle(const MapfInstance& instance, double budget_seconds,
                               ClockKind clock = ClockKind::Wall);
SolveResult run_joint_state_oracle(const MapfInstance& instance, Budget& budget);

}  // namespace mapfast
