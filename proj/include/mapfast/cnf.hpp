#pragma once

#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mapfast {

// CNF formula with DIMACS literals: variable v >= 1, negation -v.
struct Cnf {
  int num_vars = 0;
  std::vector<std::vector<int>> clauses;

  int new_var() { return ++num_vars; }
  void add(std::vector<int> clause) { clauses.push_back(std::move(clause)); }
  void add(std::initializer_list<int> clause) { clauses.emplace_back(clause); }

  // "p cnf V C" header, one zero-terminated clause per line.
  std::string to_dimacs() const;
};

Cnf parse_dimacs(std::string_view text);

// Parses solver output in the SAT competition format: an "s SATISFIABLE" /
// "s UNSATISFIABLE" line and "v" lines of signed literals. Returns nullopt
// for UNSAT; throws ParseError when no status line is present. The model is
// indexed by variable (index 0 unused).
std::optional<std::vector<bool>> parse_model(std::string_view output, int num_vars);

// True if every clause has a literal made true by `model`.
bool satisfies(const Cnf& cnf, const std::vector<bool>& model);

}  // namespace mapfast
