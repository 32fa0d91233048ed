#pragma once

#include <string>
#include <vector>

#include "mapfast/budget.hpp"
#include "mapfast/cnf.hpp"
#include "mapfast/mdd.hpp"
#include "mapfast/solve_result.hpp"

namespace mapfast {

// MDD-based sum-of-costs encoding. One variable per (agent, cell, t) node of
// each agent's MDD of cost shortest + slack, where slack = cost_bound minus
// the sum of shortest distances; the horizon is the largest of those costs.
struct SatEncoding {
  Cnf cnf;
  int horizon = 0;
  int slack = 0;
  std::vector<Mdd> mdds;                           // levels extended to horizon
  std::vector<std::vector<std::vector<int>>> vars;  // [agent][t][node] -> DIMACS var
  std::vector<std::vector<int>> late_vars;         // [agent] penalty vars
};

// Satisfiable iff a conflict-free solution with sum-of-costs <= cost_bound
// exists. Throws std::invalid_argument when cost_bound is below the sum of
// shortest distances.
SatEncoding encode_sat(const MapfInstance& instance, int cost_bound);

// Paths from a satisfying model (indexed by DIMACS variable).
std::vector<Path> decode_sat(const SatEncoding& encoding, const std::vector<bool>& model);

struct SatOptions {
  // Empty: embedded CDCL solver. Otherwise a shell command in which "{}" is
  // replaced by the path of a DIMACS file; its standard output must carry an
  // "s" status line and "v" model lines.
  std::string external_command;
};

// Largest bound tried before reporting Infeasible: sum of shortest distances
// plus agents times free cells.
int sat_bound_limit(const MapfInstance& instance);

// Iterative deepening over the cost bound starting at the sum of shortest
// distances, step 1.
SolveResult solve_sat(const MapfInstance& instance, double budget_seconds, ClockKind clock = ClockKind::Wall,
                      const SatOptions& options = {});
SolveResult run_sat(const MapfInstance& instance, Budget& budget, const SatOptions& options = {});

}  // namespace mapfast
