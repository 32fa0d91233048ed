#include "mapfast/solvers.hpp"

#include <stdexcept>

namespace mapfast {

std::string to_string(ClockKind kind) { return kind == ClockKind::Wall ? "wall" : "work"; }

ClockKind clock_from_string(const std::string& name) {
  if (name == "wall") return ClockKind::Wall;
  if (name == "work") return ClockKind::Work;
  throw std::invalid_argument("unknown clock '" + name + "' (expected wall or work)");
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Solved: return "solved";
    case SolveStatus::Timeout: return "timeout";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Error: return "error";
  }
  return "error";
}

SolveStatus status_from_string(const std::string& name) {
  if (name == "solved") return SolveStatus::Solved;
  if (name == "timeout") return SolveStatus::Timeout;
  if (name == "infeasible") return SolveStatus::Infeasible;
  if (name == "error") return SolveStatus::Error;
  throw std::invalid_argument("unknown solve status '" + name + "'");
}

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::Cbs: return "cbs";
    case Algorithm::Cbsh: return "cbsh";
    case Algorithm::Sat: return "sat";
  }
  return "?";
}

std::string algorithm_name(int index) {
  if (index < 0 || index >= kPortfolioSize) throw std::out_of_range("algorithm index out of range");
  return algorithm_name(kPortfolio[index]);
}

Algorithm algorithm_from_name(std::string_view name) {
  for (Algorithm a : kPortfolio) {
    if (algorithm_name(a) == name) return a;
  }
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "' (supported: cbs, cbsh, sat)");
}

SolveResult solve(Algorithm algorithm, const MapfInstance& instance, double budget_seconds, ClockKind clock,
                  const SatOptions& sat_options) {
  switch (algorithm) {
    case Algorithm::Cbs: return solve_cbs(instance, budget_seconds, clock);
    case Algorithm::Cbsh: return solve_cbsh(instance, budget_seconds, clock);
    case Algorithm::Sat: return solve_sat(instance, budget_seconds, clock, sat_options);
  }
  throw std::invalid_argument("unknown algorithm");
}

}  // namespace mapfast
