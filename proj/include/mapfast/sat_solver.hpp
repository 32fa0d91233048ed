#pragma once

#include <cstdint>
#include <vector>

#include "mapfast/budget.hpp"
#include "mapfast/cnf.hpp"

namespace mapfast {

enum class SatOutcome { Satisfiable, Unsatisfiable, Unknown };

// Conflict-driven clause learning with two watched literals, first-UIP
// learning, VSIDS branching, phase saving and Luby restarts. Deterministic.
class CdclSolver {
 public:
  explicit CdclSolver(const Cnf& cnf);

  // Unknown when the budget expires. Propagations are charged to it.
  SatOutcome solve(Budget* budget = nullptr);

  // Indexed by DIMACS variable; valid after Satisfiable.
  std::vector<bool> model() const;

  std::uint64_t conflicts() const { return conflicts_; }
  std::uint64_t propagations() const { return propagations_; }

 private:
  using Lit = int;  // 2*var + negated
  static Lit from_dimacs(int lit) { return lit > 0 ? 2 * (lit - 1) : 2 * (-lit - 1) + 1; }
  static int var(Lit l) { return l >> 1; }
  static Lit neg(Lit l) { return l ^ 1; }

  // 1 true, 0 false, -1 unassigned.
  int value(Lit l) const {
    const int v = assigns_[var(l)];
    return v < 0 ? -1 : (v ^ (l & 1));
  }

  bool add_clause(std::vector<Lit> lits);
  void assign(Lit l, int reason);
  int propagate();
  void analyze(int conflict, std::vector<Lit>& learnt, int& backtrack_level);
  void backtrack(int level);
  int pick_branch();
  int level() const { return static_cast<int>(trail_lim_.size()); }

  void bump(int v);
  void heap_insert(int v);
  void heap_up(int i);
  void heap_down(int i);
  int heap_pop();

  int num_vars_ = 0;
  bool inconsistent_ = false;
  std::vector<std::vector<Lit>> clauses_;
  std::vector<std::vector<int>> watches_;  // literal -> clause ids watching it
  std::vector<int> assigns_;
  std::vector<int> levels_;
  std::vector<int> reasons_;
  std::vector<char> phase_;
  std::vector<Lit> trail_;
  std::vector<int> trail_lim_;
  std::size_t qhead_ = 0;

  std::vector<double> activity_;
  double bump_amount_ = 1.0;
  std::vector<int> heap_;
  std::vector<int> heap_pos_;

  std::vector<char> seen_;
  std::uint64_t conflicts_ = 0;
  std::uint64_t propagations_ = 0;
};

}  // namespace mapfast
