// Standalone DIMACS front end for the embedded CDCL solver. Prints the
// SAT-competition "s" status line and "v" model lines.
#include <iostream>

#include "mapfast/cnf.hpp"
#include "mapfast/errors.hpp"
#include "mapfast/grid.hpp"
#include "mapfast/sat_solver.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: mapfast_dimacs FILE.cnf\n";
    return 2;
  }
  try {
    const mapfast::Cnf cnf = mapfast::parse_dimacs(mapfast::read_text_file(argv[1]));
    mapfast::CdclSolver solver(cnf);
    if (solver.solve() != mapfast::SatOutcome::Satisfiable) {
      std::cout << "s UNSATISFIABLE\n";
      return 20;
    }
    const auto model = solver.model();
    std::cout << "s SATISFIABLE\nv";
    for (int v = 1; v <= cnf.num_vars; ++v) std::cout << ' ' << (model[v] ? v : -v);
    std::cout << " 0\n";
    return 10;
  } catch (const mapfast::IoError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}
