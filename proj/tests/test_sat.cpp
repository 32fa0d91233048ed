#include <doctest.h>

#include <cstdlib>

#include "mapfast/cnf.hpp"
#include "mapfast/conflicts.hpp"
#include "mapfast/oracle.hpp"
#include "mapfast/rng.hpp"
#include "mapfast/sat_mapf.hpp"
#include "mapfast/sat_solver.hpp"

using namespace mapfast;

namespace {

MapfInstance make(GridMap map, std::vector<std::pair<Coord, Coord>> tasks) {
  MapfInstance inst;
  inst.map = std::move(map);
  for (std::size_t i = 0; i < tasks.size(); ++i) inst.agents.push_back({static_cast<int>(i), tasks[i].first, tasks[i].second});
  return inst;
}

bool brute_force_sat(const Cnf& cnf) {
  for (std::uint32_t bits = 0; bits < (1u << cnf.num_vars); ++bits) {
    std::vector<bool> model(cnf.num_vars + 1);
    for (int v = 1; v <= cnf.num_vars; ++v) model[v] = (bits >> (v - 1)) & 1u;
    if (satisfies(cnf, model)) return true;
  }
  return false;
}

SatOutcome solve_embedded(const Cnf& cnf) {
  CdclSolver s(cnf);
  return s.solve();
}

}  // namespace

TEST_CASE("CDCL agrees with enumeration on random 3-CNF") {
  Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    Cnf cnf;
    cnf.num_vars = 4 + static_cast<int>(rng.below(9));
    const int clauses = static_cast<int>(rng.below(cnf.num_vars * 6));
    for (int c = 0; c < clauses; ++c) {
      std::vector<int> clause;
      const int len = 1 + static_cast<int>(rng.below(3));
      for (int k = 0; k < len; ++k) {
        const int v = 1 + static_cast<int>(rng.below(cnf.num_vars));
        clause.push_back(rng.below(2) ? v : -v);
      }
      cnf.add(clause);
    }
    CdclSolver solver(cnf);
    const SatOutcome outcome = solver.solve();
    const bool expected = brute_force_sat(cnf);
    CHECK(outcome == (expected ? SatOutcome::Satisfiable : SatOutcome::Unsatisfiable));
    if (outcome == SatOutcome::Satisfiable) CHECK(satisfies(cnf, solver.model()));
  }
}

TEST_CASE("CDCL handles trivial formulas") {
  Cnf empty;
  empty.num_vars = 2;
  CHECK(solve_embedded(empty) == SatOutcome::Satisfiable);
  Cnf contradiction;
  contradiction.num_vars = 1;
  contradiction.add({1});
  contradiction.add({-1});
  CHECK(solve_embedded(contradiction) == SatOutcome::Unsatisfiable);
  Cnf empty_clause;
  empty_clause.num_vars = 1;
  empty_clause.add(std::vector<int>{});
  CHECK(solve_embedded(empty_clause) == SatOutcome::Unsatisfiable);
}

TEST_CASE("CDCL proves a pigeonhole formula unsatisfiable") {
  // 6 pigeons, 5 holes.
  Cnf cnf;
  const int pigeons = 6, holes = 5;
  auto var = [&](int p, int h) { return p * holes + h + 1; };
  cnf.num_vars = pigeons * holes;
  for (int p = 0; p < pigeons; ++p) {
    std::vector<int> c;
    for (int h = 0; h < holes; ++h) c.push_back(var(p, h));
    cnf.add(c);
  }
  for (int h = 0; h < holes; ++h)
    for (int p = 0; p < pigeons; ++p)
      for (int q = p + 1; q < pigeons; ++q) cnf.add({-var(p, h), -var(q, h)});
  CHECK(solve_embedded(cnf) == SatOutcome::Unsatisfiable);
}

TEST_CASE("DIMACS export and parse") {
  Cnf cnf;
  cnf.num_vars = 3;
  cnf.add({1, -2});
  cnf.add({3});
  const std::string text = cnf.to_dimacs();
  CHECK(text == "p cnf 3 2\n1 -2 0\n3 0\n");
  Cnf back = parse_dimacs("c comment\n" + text);
  CHECK(back.num_vars == 3);
  CHECK(back.clauses == cnf.clauses);
  CHECK_THROWS_AS(parse_dimacs("1 2 0\n"), ParseError);
  CHECK_THROWS_AS(parse_dimacs("p cnf 2 1\n1 3 0\n"), ParseError);
  CHECK_THROWS_AS(parse_dimacs("p cnf 2 2\n1 0\n"), ParseError);
}

TEST_CASE("parse_model reads competition output") {
  auto m = parse_model("c hi\ns SATISFIABLE\nv 1 -2\nv 3 0\n", 3);
  REQUIRE(m);
  CHECK((*m)[1]);
  CHECK_FALSE((*m)[2]);
  CHECK((*m)[3]);
  CHECK_FALSE(parse_model("s UNSATISFIABLE\n", 3).has_value());
  CHECK_THROWS_AS(parse_model("v 1 0\n", 3), ParseError);
}

TEST_CASE("encode_sat examples") {
  MapfInstance single = make(GridMap(4, 3), {{{0, 0}, {3, 2}}});
  SatEncoding enc = encode_sat(single, 5);
  CHECK(enc.cnf.num_vars > 0);
  for (const auto& clause : enc.cnf.clauses) {
    for (int lit : clause) {
      CHECK(lit != 0);
      CHECK(std::abs(lit) <= enc.cnf.num_vars);
    }
  }
  CHECK(solve_embedded(enc.cnf) == SatOutcome::Satisfiable);
  CHECK_THROWS_AS(encode_sat(single, 4), std::invalid_argument);

  // Closed corridor swap: no bound admits a solution.
  MapfInstance corridor = make(GridMap(3, 1), {{{0, 0}, {2, 0}}, {{2, 0}, {0, 0}}});
  REQUIRE(joint_state_oracle(corridor, 10.0).status == SolveStatus::Infeasible);
  for (int bound = 4; bound <= 12; ++bound) {
    CHECK(solve_embedded(encode_sat(corridor, bound).cnf) == SatOutcome::Unsatisfiable);
  }
}

TEST_CASE("encode_sat satisfiable exactly from the optimal bound") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    MapfInstance inst = random_instance(500 + seed, 4, 4, 0.15, 3);
    auto opt = joint_state_oracle(inst, 20.0);
    if (!opt.solved()) continue;
    int lower = 0;
    for (const auto& a : inst.agents) lower += distance_field(inst.map, a.goal).at(a.start);
    for (int bound = lower; bound <= opt.sum_of_costs + 1; ++bound) {
      SatEncoding enc = encode_sat(inst, bound);
      CdclSolver solver(enc.cnf);
      const SatOutcome outcome = solver.solve();
      CHECK(outcome == (bound >= opt.sum_of_costs ? SatOutcome::Satisfiable : SatOutcome::Unsatisfiable));
      if (outcome == SatOutcome::Satisfiable) {
        auto paths = decode_sat(enc, solver.model());
        CHECK(validate_solution(inst, paths).empty());
        int soc = 0;
        for (const auto& p : paths) soc += p.cost();
        CHECK(soc <= bound);
      }
    }
  }
}

TEST_CASE("solve_sat examples") {
  MapfInstance single = make(GridMap(5, 5), {{{0, 0}, {4, 3}}});
  auto r = solve_sat(single, 10.0);
  REQUIRE(r.solved());
  CHECK(r.sum_of_costs == 7);
  CHECK(r.stats.sat_calls == 1);

  MapfInstance swap = make(GridMap(3, 3), {{{0, 1}, {2, 1}}, {{2, 1}, {0, 1}}});
  auto s = solve_sat(swap, 10.0);
  REQUIRE(s.solved());
  CHECK(s.sum_of_costs == joint_state_oracle(swap, 10.0).sum_of_costs);
  CHECK(validate_solution(swap, s.paths).empty());

  MapfInstance corridor = make(GridMap(3, 1), {{{0, 0}, {2, 0}}, {{2, 0}, {0, 0}}});
  CHECK(solve_sat(corridor, 30.0).status == SolveStatus::Infeasible);
  CHECK(solve_sat(swap, 0.0).status == SolveStatus::Timeout);
}

#ifdef MAPFAST_DIMACS_SOLVER
TEST_CASE("solve_sat through an external DIMACS solver") {
  MapfInstance swap = make(GridMap(3, 3), {{{0, 1}, {2, 1}}, {{2, 1}, {0, 1}}});
  SatOptions options;
  options.external_command = std::string(MAPFAST_DIMACS_SOLVER) + " {}";
  auto r = solve_sat(swap, 10.0, ClockKind::Wall, options);
  REQUIRE(r.solved());
  CHECK(r.sum_of_costs == 6);
  CHECK(validate_solution(swap, r.paths).empty());

  options.external_command = "/nonexistent/solver {}";
  auto bad = solve_sat(swap, 10.0, ClockKind::Wall, options);
  CHECK(bad.status == SolveStatus::Timeout);
  CHECK(bad.diagnostic.find("external") != std::string::npos);
}
#endif
