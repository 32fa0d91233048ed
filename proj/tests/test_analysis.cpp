#include <doctest.h>

#include <sstream>

#include "mapfast/analysis.hpp"
#include "support.hpp"

using namespace mapfast;
using mapfast::testing::make_instance;

TEST_CASE("heatmap examples") {
  GridMap map(5, 3);
  MapfInstance one = make_instance(map, {{{0, 0}, {4, 0}}});
  HeatGrid g = heatmap(map, std::vector<MapfInstance>{one});
  for (int c = 0; c < 5; ++c) CHECK(g.at({c, 0}) == 1);
  CHECK(g.total() == 5);

  HeatGrid empty = heatmap(map, std::vector<MapfInstance>{});
  CHECK(empty.total() == 0);
  CHECK(empty.counts.size() == 15);

  HeatGrid twice = heatmap(map, std::vector<MapfInstance>{one, one});
  for (std::size_t i = 0; i < g.counts.size(); ++i) CHECK(twice.counts[i] == 2 * g.counts[i]);

  MapfInstance other = make_instance(GridMap(4, 3), {{{0, 0}, {3, 0}}});
  CHECK_THROWS_AS(heatmap(map, std::vector<MapfInstance>{one, other}), std::invalid_argument);
}

TEST_CASE("heat grid total equals summed path lengths") {
  GridMap map = random_instance(2, 10, 10, 0.2, 1).map;
  std::vector<MapfInstance> set;
  std::uint64_t expected = 0;
  for (std::uint64_t s = 0; s < 8; ++s) {
    MapfInstance inst = random_agents_on_map(s, map, 3);
    for (const auto& p : single_agent_paths(inst)) expected += p.cells.size();
    set.push_back(inst);
  }
  CHECK(heatmap(map, set).total() == expected);
}

TEST_CASE("PGM export scales by the maximum") {
  HeatGrid g{3, 1, {0, 2, 4}};
  std::ostringstream out;
  write_pgm(out, g);
  const std::string s = out.str();
  CHECK(s.substr(0, 11) == "P5\n3 1\n255\n");
  REQUIRE(s.size() == 14);
  CHECK(static_cast<unsigned char>(s[11]) == 0);
  CHECK(static_cast<unsigned char>(s[12]) == 128);
  CHECK(static_cast<unsigned char>(s[13]) == 255);

  std::ostringstream zero;
  write_pgm(zero, HeatGrid{2, 1, {0, 0}});
  CHECK(zero.str() == std::string("P5\n2 1\n255\n") + std::string(2, '\0'));
}

TEST_CASE("scatter rows") {
  std::map<std::string, MapfInstance> instances;
  std::vector<RunRecord> records;
  for (std::uint64_t s = 0; s < 5; ++s) {
    MapfInstance inst = random_instance(s, 6, 6, 0.2, 2);
    instances[inst.name] = inst;
    RunRecord r;
    r.instance_id = inst.name;
    r.budget_seconds = 1.0;
    r.results[s % 3] = {SolveStatus::Solved, 0.1, ""};
    refresh_outcome(r);
    records.push_back(r);
  }
  auto rows = scatter_rows(records, features_for(instances));
  CHECK(rows.size() == records.size());
  for (const auto& row : rows) {
    CHECK(row.space_ratio > 0.0);
    CHECK(row.space_ratio <= 1.0);
    CHECK((row.fastest == "cbs" || row.fastest == "cbsh" || row.fastest == "sat"));
    CHECK(row.n_agents == 2);
  }
  std::ostringstream a, b;
  write_scatter_csv(a, rows);
  write_scatter_csv(b, scatter_rows(records, features_for(instances)));
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("instance_id,n_agents,avg_sp_length,space_ratio,fastest\n", 0) == 0);
  CHECK_THROWS_AS(scatter_rows(records, {}), std::invalid_argument);

  auto won = instances_won_by(0, records, instances);
  CHECK(won.size() == 2);
}
