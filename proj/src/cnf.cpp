#include "mapfast/cnf.hpp"

#include <cstdlib>
#include <sstream>

#include "mapfast/errors.hpp"

namespace mapfast {

std::string Cnf::to_dimacs() const {
  std::string out = "p cnf " + std::to_string(num_vars) + " " + std::to_string(clauses.size()) + "\n";
  for (const auto& clause : clauses) {
    for (int lit : clause) {
      out += std::to_string(lit);
      out += ' ';
    }
    out += "0\n";
  }
  return out;
}

Cnf parse_dimacs(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  Cnf cnf;
  bool header = false;
  std::size_t declared = 0;
  std::vector<int> current;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == 'c') continue;
    std::istringstream ls(line);
    if (line[0] == 'p') {
      std::string p, fmt;
      ls >> p >> fmt >> cnf.num_vars >> declared;
      if (fmt != "cnf" || !ls) throw ParseError("malformed DIMACS header");
      header = true;
      continue;
    }
    if (!header) throw ParseError("DIMACS clause before header");
    int lit;
    while (ls >> lit) {
      if (lit == 0) {
        cnf.clauses.push_back(std::move(current));
        current.clear();
      } else {
        if (std::abs(lit) > cnf.num_vars) throw ParseError("DIMACS literal out of range");
        current.push_back(lit);
      }
    }
  }
  if (!header) throw ParseError("missing DIMACS header");
  if (!current.empty()) throw ParseError("unterminated DIMACS clause");
  if (cnf.clauses.size() != declared) throw ParseError("DIMACS clause count mismatch");
  return cnf;
}

std::optional<std::vector<bool>> parse_model(std::string_view output, int num_vars) {
  std::istringstream in{std::string(output)};
  std::string line;
  bool status = false;
  bool sat = false;
  std::vector<bool> model(num_vars + 1, false);
  while (std::getline(in, line)) {
    if (line.rfind("s ", 0) == 0) {
      status = true;
      sat = line.find("UNSATISFIABLE") == std::string::npos && line.find("SATISFIABLE") != std::string::npos;
    } else if (line.rfind("v ", 0) == 0 || line == "v") {
      std::istringstream ls(line.substr(1));
      int lit;
      while (ls >> lit) {
        if (lit > 0 && lit <= num_vars) model[lit] = true;
      }
    }
  }
  if (!status) throw ParseError("solver output has no status line");
  if (!sat) return std::nullopt;
  return model;
}

bool satisfies(const Cnf& cnf, const std::vector<bool>& model) {
  for (const auto& clause : cnf.clauses) {
    bool ok = false;
    for (int lit : clause) {
      const bool v = model[std::abs(lit)];
      if ((lit > 0) == v) {
        ok = true;
        break;
      }
    }
    if (!ok) return false;
  }
  return true;
}

}  // namespace mapfast
