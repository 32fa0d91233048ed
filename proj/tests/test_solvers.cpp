#include <doctest.h>

#include <functional>
#include <set>

#include "mapfast/cbs.hpp"
#include "mapfast/conflicts.hpp"
#include "mapfast/mdd.hpp"
#include "mapfast/oracle.hpp"
#include "mapfast/solvers.hpp"

using namespace mapfast;

namespace {

MapfInstance make(GridMap map, std::vector<std::pair<Coord, Coord>> tasks) {
  MapfInstance inst;
  inst.map = std::move(map);
  for (std::size_t i = 0; i < tasks.size(); ++i) inst.agents.push_back({static_cast<int>(i), tasks[i].first, tasks[i].second});
  return inst;
}

Path path(std::initializer_list<Coord> cells) { return Path{std::vector<Coord>(cells)}; }

int sum_of_shortest(const MapfInstance& inst) {
  int s = 0;
  for (const auto& a : inst.agents) s += shortest_path(inst.map, a.start, a.goal).cost();
  return s;
}

// Cells per timestep over every walk of exactly `cost` steps ending at goal.
std::vector<std::set<Coord>> enumerate_levels(const GridMap& m, Coord start, Coord goal, int cost) {
  std::vector<std::set<Coord>> levels(cost + 1);
  std::vector<Coord> walk{start};
  std::function<void()> dfs = [&] {
    const int t = static_cast<int>(walk.size()) - 1;
    if (t == cost) {
      if (walk.back() == goal) {
        for (int i = 0; i <= cost; ++i) levels[i].insert(walk[i]);
      }
      return;
    }
    const Coord c = walk.back();
    for (Coord n : {Coord{c.col, c.row - 1}, Coord{c.col - 1, c.row}, Coord{c.col + 1, c.row}, Coord{c.col, c.row + 1}, c}) {
      if (!m.passable(n)) continue;
      walk.push_back(n);
      dfs();
      walk.pop_back();
    }
  };
  dfs();
  return levels;
}

// 5x3 map with a one-cell door in the middle row.
MapfInstance door_instance() {
  GridMap m(5, 3);
  for (int c : {0, 1, 3, 4}) m.set_passable({c, 1}, false);
  return make(m, {{{2, 0}, {2, 2}}, {{2, 2}, {2, 0}}});
}

}  // namespace

TEST_CASE("validate_solution detects vertex and edge conflicts") {
  MapfInstance inst = make(GridMap(3, 3), {{{0, 0}, {2, 0}}, {{0, 2}, {2, 2}}});
  CHECK(validate_solution(inst, {path({{0, 0}, {1, 0}, {2, 0}}), path({{0, 2}, {1, 2}, {2, 2}})}).empty());

  MapfInstance meet = make(GridMap(3, 3), {{{0, 1}, {2, 1}}, {{1, 0}, {1, 2}}});
  auto vc = validate_solution(meet, {path({{0, 1}, {0, 1}, {1, 1}, {2, 1}}), path({{1, 0}, {1, 0}, {1, 1}, {1, 2}})});
  REQUIRE(vc.size() == 1);
  CHECK(vc[0].kind == ConflictKind::Vertex);
  CHECK(vc[0].time == 2);
  CHECK(vc[0].from == Coord{1, 1});

  MapfInstance swap = make(GridMap(2, 1), {{{0, 0}, {1, 0}}, {{1, 0}, {0, 0}}});
  auto ec = validate_solution(swap, {path({{0, 0}, {1, 0}}), path({{1, 0}, {0, 0}})});
  REQUIRE(ec.size() == 1);
  CHECK(ec[0].kind == ConflictKind::Edge);
  CHECK(ec[0].time == 1);
  CHECK(ec[0].from == Coord{0, 0});
  CHECK(ec[0].to == Coord{1, 0});

  CHECK_THROWS_AS(validate_solution(swap, {path({{0, 0}}), path({{1, 0}, {0, 0}})}), std::invalid_argument);
  CHECK_THROWS_AS(validate_solution(swap, {path({{0, 0}, {1, 0}})}), std::invalid_argument);
}

TEST_CASE("validate_solution sees conflicts with agents parked at their goals") {
  MapfInstance inst = make(GridMap(3, 1), {{{1, 0}, {1, 0}}, {{0, 0}, {2, 0}}});
  auto c = validate_solution(inst, {path({{1, 0}}), path({{0, 0}, {1, 0}, {2, 0}})});
  REQUIRE(c.size() == 1);
  CHECK(c[0].time == 1);
  CHECK(c[0].first == 0);
}

TEST_CASE("build_mdd examples") {
  GridMap corridor(3, 1);
  Mdd m = build_mdd(corridor, {0, {0, 0}, {2, 0}}, 2);
  REQUIRE(m.levels.size() == 3);
  for (const auto& level : m.levels) CHECK(level.size() == 1);

  GridMap open(3, 3);
  Mdd d = build_mdd(open, {0, {0, 0}, {2, 2}}, 4);
  auto expected = enumerate_levels(open, {0, 0}, {2, 2}, 4);
  CHECK(expected[2] == std::set<Coord>{{2, 0}, {1, 1}, {0, 2}});
  CHECK(std::set<Coord>(d.levels[2].begin(), d.levels[2].end()) == expected[2]);

  CHECK_THROWS_AS(build_mdd(open, {0, {0, 0}, {2, 2}}, 3), std::invalid_argument);
}

TEST_CASE("build_mdd levels equal exhaustive walk enumeration") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    MapfInstance inst = random_instance(300 + seed, 4, 3, 0.2, 1);
    const auto& t = inst.agents[0];
    const int d = distance_field(inst.map, t.goal).at(t.start);
    for (int extra = 0; extra <= 2; ++extra) {
      Mdd mdd = build_mdd(inst.map, t, d + extra);
      auto expected = enumerate_levels(inst.map, t.start, t.goal, d + extra);
      for (int l = 0; l <= d + extra; ++l) {
        CHECK(std::set<Coord>(mdd.levels[l].begin(), mdd.levels[l].end()) == expected[l]);
      }
    }
  }
}

TEST_CASE("joint_state_oracle examples") {
  MapfInstance single = make(GridMap(4, 4), {{{0, 0}, {3, 2}}});
  auto r = joint_state_oracle(single, 10.0);
  REQUIRE(r.solved());
  CHECK(r.sum_of_costs == 5);

  MapfInstance disjoint = make(GridMap(4, 4), {{{0, 0}, {3, 0}}, {{0, 3}, {3, 3}}});
  auto d = joint_state_oracle(disjoint, 10.0);
  REQUIRE(d.solved());
  CHECK(d.sum_of_costs == 6);

  MapfInstance corridor = make(GridMap(3, 1), {{{0, 0}, {2, 0}}, {{2, 0}, {0, 0}}});
  CHECK(joint_state_oracle(corridor, 10.0).status == SolveStatus::Infeasible);

  // Two agents swapping across an open 3x3: one must detour by two steps.
  MapfInstance swap = make(GridMap(3, 3), {{{0, 1}, {2, 1}}, {{2, 1}, {0, 1}}});
  auto s = joint_state_oracle(swap, 10.0);
  REQUIRE(s.solved());
  CHECK(s.sum_of_costs == 6);
  CHECK(validate_solution(swap, s.paths).empty());
}

TEST_CASE("solve_cbs examples") {
  MapfInstance disjoint = make(GridMap(4, 4), {{{0, 0}, {3, 0}}, {{0, 3}, {3, 3}}});
  auto r = solve_cbs(disjoint, 10.0);
  REQUIRE(r.solved());
  CHECK(r.sum_of_costs == 6);
  CHECK(r.stats.high_level_nodes == 1);

  MapfInstance swap = make(GridMap(3, 3), {{{0, 1}, {2, 1}}, {{2, 1}, {0, 1}}});
  auto s = solve_cbs(swap, 10.0);
  REQUIRE(s.solved());
  CHECK(s.sum_of_costs == joint_state_oracle(swap, 10.0).sum_of_costs);
  CHECK(validate_solution(swap, s.paths).empty());

  auto t = solve_cbs(swap, 0.0);
  CHECK(t.status == SolveStatus::Timeout);
  CHECK(t.runtime_seconds == 0.0);
}

TEST_CASE("solve_cbsh examples") {
  MapfInstance disjoint = make(GridMap(4, 4), {{{0, 0}, {3, 0}}, {{0, 3}, {3, 3}}});
  auto a = solve_cbs(disjoint, 10.0);
  auto b = solve_cbsh(disjoint, 10.0);
  REQUIRE(b.solved());
  CHECK(a.paths == b.paths);
  CHECK(a.sum_of_costs == b.sum_of_costs);

  MapfInstance door = door_instance();
  CHECK(cbsh_root_heuristic(door) >= 1);
  auto opt = joint_state_oracle(door, 10.0);
  auto c = solve_cbsh(door, 10.0);
  REQUIRE(opt.solved());
  REQUIRE(c.solved());
  CHECK(c.sum_of_costs == opt.sum_of_costs);
  CHECK(solve_cbs(door, 10.0).sum_of_costs == opt.sum_of_costs);
  CHECK(solve_cbsh(door, 0.0).status == SolveStatus::Timeout);
}

TEST_CASE("solvers agree with the oracle on small random instances") {
  // Plateaus with many equal-cost conflicts can stall plain CBS, so a
  // timeout is tolerated; any answer that is returned must be optimal.
  int solved = 0;
  int timeouts = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    MapfInstance inst = random_instance(seed, 4 + seed % 3, 4 + (seed / 3) % 3, 0.2, 2 + seed % 2);
    auto opt = joint_state_oracle(inst, 20.0);
    if (!opt.solved()) continue;
    ++solved;
    CHECK(validate_solution(inst, opt.paths).empty());
    CHECK(opt.sum_of_costs >= sum_of_shortest(inst));
    for (Algorithm a : kPortfolio) {
      auto r = solve(a, inst, 2.0, ClockKind::Work);
      INFO("seed " << seed << " algorithm " << algorithm_name(a));
      if (r.status == SolveStatus::Timeout) {
        ++timeouts;
        continue;
      }
      REQUIRE(r.solved());
      CHECK(r.sum_of_costs == opt.sum_of_costs);
      CHECK(validate_solution(inst, r.paths).empty());
      int total = 0;
      for (const auto& p : r.paths) total += p.cost();
      CHECK(total == r.sum_of_costs);
    }
    // Lower bound equality iff the root is conflict-free.
    std::vector<Path> root;
    for (const auto& t : inst.agents) root.push_back(shortest_path(inst.map, t.start, t.goal));
    const bool root_free = find_conflicts(root, true).empty();
    if (root_free) CHECK(opt.sum_of_costs == sum_of_shortest(inst));
  }
  CHECK(solved > 40);
  CHECK(timeouts <= 3);
}

TEST_CASE("CBSH node f never exceeds the optimum") {
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    MapfInstance inst = random_instance(seed, 5, 5, 0.2, 3);
    auto opt = joint_state_oracle(inst, 20.0);
    if (!opt.solved()) continue;
    Budget budget(20.0);
    CbsOptions options;
    options.cardinal_heuristic = true;
    int worst = 0;
    options.on_expand = [&](int cost, int h) { worst = std::max(worst, cost + h); };
    auto r = run_cbs(inst, budget, options);
    REQUIRE(r.solved());
    CHECK(worst <= opt.sum_of_costs);
  }
}

TEST_CASE("solvers are deterministic") {
  MapfInstance inst = random_instance(77, 6, 6, 0.15, 4);
  for (Algorithm a : kPortfolio) {
    auto r1 = solve(a, inst, 20.0);
    auto r2 = solve(a, inst, 20.0);
    REQUIRE(r1.solved());
    CHECK(r1.paths == r2.paths);
  }
  auto o1 = joint_state_oracle(inst, 20.0);
  auto o2 = joint_state_oracle(inst, 20.0);
  CHECK(o1.paths == o2.paths);
}

TEST_CASE("work clock makes budgets reproducible") {
  MapfInstance inst = random_instance(91, 8, 8, 0.1, 4);
  for (Algorithm a : kPortfolio) {
    auto r1 = solve(a, inst, 5.0, ClockKind::Work);
    auto r2 = solve(a, inst, 5.0, ClockKind::Work);
    CHECK(r1.status == r2.status);
    CHECK(r1.runtime_seconds == r2.runtime_seconds);
    CHECK(r1.stats.work == r2.stats.work);
  }
}

TEST_CASE("algorithm names") {
  CHECK(algorithm_name(Algorithm::Cbsh) == "cbsh");
  CHECK(algorithm_from_name("sat") == Algorithm::Sat);
  CHECK_THROWS_AS(algorithm_from_name("bcp"), std::invalid_argument);
}
