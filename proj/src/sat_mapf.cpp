#include "mapfast/sat_mapf.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <unistd.h>

#include "mapfast/conflicts.hpp"
#include "mapfast/errors.hpp"
#include "mapfast/sat_solver.hpp"

namespace mapfast {

namespace {

// Sinz sequential counter: at most k of xs true.
void at_most_k(Cnf& cnf, const std::vector<int>& xs, int k) {
  const int n = static_cast<int>(xs.size());
  if (n <= k) return;
  if (k == 0) {
    for (int x : xs) cnf.add({-x});
    return;
  }
  std::vector<std::vector<int>> s(n - 1, std::vector<int>(k + 1, 0));
  for (int i = 0; i < n - 1; ++i) {
    for (int j = 1; j <= k; ++j) s[i][j] = cnf.new_var();
  }
  cnf.add({-xs[0], s[0][1]});
  for (int j = 2; j <= k; ++j) cnf.add({-s[0][j]});
  for (int i = 1; i < n - 1; ++i) {
    cnf.add({-xs[i], s[i][1]});
    cnf.add({-s[i - 1][1], s[i][1]});
    for (int j = 2; j <= k; ++j) {
      cnf.add({-xs[i], -s[i - 1][j - 1], s[i][j]});
      cnf.add({-s[i - 1][j], s[i][j]});
    }
    cnf.add({-xs[i], -s[i - 1][k]});
  }
  cnf.add({-xs[n - 1], -s[n - 2][k]});
}

}  // namespace

SatEncoding encode_sat(const MapfInstance& instance, int cost_bound) {
  check_well_formed(instance);
  const GridMap& map = instance.map;
  const int n = instance.agent_count();
  std::vector<DistanceField> fields;
  std::vector<int> dist(n);
  int lower = 0;
  for (const auto& a : instance.agents) {
    fields.push_back(distance_field(map, a.goal));
    dist[a.id] = fields.back().at(a.start);
    if (dist[a.id] == DistanceField::kUnreachable) throw std::invalid_argument("agent cannot reach its goal");
    lower += dist[a.id];
  }
  if (cost_bound < lower) {
    throw std::invalid_argument("cost bound " + std::to_string(cost_bound) + " below lower bound " +
                                std::to_string(lower));
  }

  SatEncoding enc;
  enc.slack = cost_bound - lower;
  for (int a = 0; a < n; ++a) enc.horizon = std::max(enc.horizon, dist[a] + enc.slack);
  const int T = enc.horizon;
  Cnf& cnf = enc.cnf;

  for (int a = 0; a < n; ++a) {
    Mdd mdd = build_mdd(map, instance.agents[a], dist[a] + enc.slack, {}, &fields[a]);
    // Park at the goal up to the common horizon.
    const int goal_index = 0;
    for (int t = mdd.cost; t < T; ++t) {
      mdd.children.push_back({{goal_index}});
      mdd.levels.push_back({instance.agents[a].goal});
    }
    enc.vars.emplace_back(T + 1);
    for (int t = 0; t <= T; ++t) {
      for (std::size_t i = 0; i < mdd.levels[t].size(); ++i) enc.vars[a][t].push_back(cnf.new_var());
    }
    enc.mdds.push_back(std::move(mdd));
  }

  for (int a = 0; a < n; ++a) {
    const Mdd& mdd = enc.mdds[a];
    const auto& x = enc.vars[a];
    cnf.add({x[0][0]});
    cnf.add({x[T][0]});
    for (int t = 0; t <= T; ++t) {
      for (std::size_t i = 0; i < x[t].size(); ++i) {
        for (std::size_t j = i + 1; j < x[t].size(); ++j) cnf.add({-x[t][i], -x[t][j]});
      }
    }
    for (int t = 0; t < T; ++t) {
      for (std::size_t i = 0; i < x[t].size(); ++i) {
        std::vector<int> clause{-x[t][i]};
        for (int c : mdd.children[t][i]) clause.push_back(x[t + 1][c]);
        cnf.add(std::move(clause));
      }
    }
  }

  // Cell -> node index lookup per (agent, t).
  auto node_at = [&](int a, int t, Coord c) -> int {
    const auto& level = enc.mdds[a].levels[t];
    auto it = std::lower_bound(level.begin(), level.end(), c, [&](Coord lhs, Coord rhs) {
      return map.index(lhs) < map.index(rhs);
    });
    if (it != level.end() && *it == c) return static_cast<int>(it - level.begin());
    return -1;
  };

  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      for (int t = 0; t <= T; ++t) {
        const auto& level = enc.mdds[a].levels[t];
        for (std::size_t i = 0; i < level.size(); ++i) {
          const int j = node_at(b, t, level[i]);
          if (j >= 0) cnf.add({-enc.vars[a][t][i], -enc.vars[b][t][j]});
        }
      }
      for (int t = 0; t < T; ++t) {
        const auto& level = enc.mdds[a].levels[t];
        for (std::size_t i = 0; i < level.size(); ++i) {
          for (int ci : enc.mdds[a].children[t][i]) {
            const Coord u = level[i];
            const Coord v = enc.mdds[a].levels[t + 1][ci];
            if (u == v) continue;
            const int bv = node_at(b, t, v);
            const int bu = node_at(b, t + 1, u);
            if (bv < 0 || bu < 0) continue;
            const auto& bc = enc.mdds[b].children[t][bv];
            if (std::find(bc.begin(), bc.end(), bu) == bc.end()) continue;
            cnf.add({-enc.vars[a][t][i], -enc.vars[a][t + 1][ci], -enc.vars[b][t][bv], -enc.vars[b][t + 1][bu]});
          }
        }
      }
    }
  }

  // Late-arrival penalties: late[a][k] is forced when agent a is off its
  // goal at time dist[a] + k or later.
  std::vector<int> all_late;
  enc.late_vars.resize(n);
  for (int a = 0; a < n; ++a) {
    const Coord goal = instance.agents[a].goal;
    for (int k = 0; k < enc.slack; ++k) {
      const int p = cnf.new_var();
      enc.late_vars[a].push_back(p);
      all_late.push_back(p);
      const int t = dist[a] + k;
      const auto& level = enc.mdds[a].levels[t];
      for (std::size_t i = 0; i < level.size(); ++i) {
        if (level[i] != goal) cnf.add({-enc.vars[a][t][i], p});
      }
      if (k > 0) cnf.add({-p, enc.late_vars[a][k - 1]});
    }
  }
  at_most_k(cnf, all_late, enc.slack);
  return enc;
}

std::vector<Path> decode_sat(const SatEncoding& encoding, const std::vector<bool>& model) {
  std::vector<Path> paths;
  for (std::size_t a = 0; a < encoding.mdds.size(); ++a) {
    Path p;
    for (int t = 0; t <= encoding.horizon; ++t) {
      const auto& vars = encoding.vars[a][t];
      int chosen = -1;
      for (std::size_t i = 0; i < vars.size(); ++i) {
        if (model[vars[i]]) {
          chosen = static_cast<int>(i);
          break;
        }
      }
      if (chosen < 0) throw std::runtime_error("model leaves an agent without a position");
      p.cells.push_back(encoding.mdds[a].levels[t][chosen]);
    }
    while (p.cells.size() > 1 && p.cells[p.cells.size() - 2] == p.cells.back()) p.cells.pop_back();
    paths.push_back(std::move(p));
  }
  return paths;
}

int sat_bound_limit(const MapfInstance& instance) {
  int lower = 0;
  for (const auto& a : instance.agents) {
    const int d = distance_field(instance.map, a.goal).at(a.start);
    if (d == DistanceField::kUnreachable) return -1;
    lower += d;
  }
  return lower + instance.agent_count() * instance.map.free_count();
}

namespace {

std::optional<std::vector<bool>> run_external(const std::string& command_template, const Cnf& cnf) {
  namespace fs = std::filesystem;
  static int counter = 0;
  const fs::path file = fs::temp_directory_path() /
                        ("mapfast-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + ".cnf");
  {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file.string());
    out << cnf.to_dimacs();
  }
  std::string command = command_template;
  const auto pos = command.find("{}");
  if (pos == std::string::npos) {
    command += " " + file.string();
  } else {
    command.replace(pos, 2, file.string());
  }
  std::string output;
  FILE* pipe = ::popen(command.c_str(), "r");
  if (!pipe) {
    fs::remove(file);
    throw IoError("cannot start external SAT solver");
  }
  char buffer[4096];
  std::size_t got;
  while ((got = std::fread(buffer, 1, sizeof buffer, pipe)) > 0) output.append(buffer, got);
  ::pclose(pipe);
  fs::remove(file);
  return parse_model(output, cnf.num_vars);
}

}  // namespace

SolveResult run_sat(const MapfInstance& instance, Budget& budget, const SatOptions& options) {
  SolveResult result;
  auto finish = [&](SolveStatus status) {
    result.status = status;
    result.runtime_seconds = status == SolveStatus::Timeout ? budget.limit() : budget.elapsed();
    result.stats.work = budget.work();
    return result;
  };
  check_well_formed(instance);
  if (budget.expired()) {
    result.diagnostic = "budget exhausted";
    return finish(SolveStatus::Timeout);
  }
  const int limit = sat_bound_limit(instance);
  if (limit < 0) {
    result.diagnostic = "an agent cannot reach its goal";
    return finish(SolveStatus::Infeasible);
  }
  int bound = limit - instance.agent_count() * instance.map.free_count();
  for (; bound <= limit; ++bound) {
    if (budget.expired()) {
      result.diagnostic = "budget exhausted";
      return finish(SolveStatus::Timeout);
    }
    SatEncoding enc = encode_sat(instance, bound);
    budget.charge(enc.cnf.clauses.size());
    ++result.stats.sat_calls;
    result.stats.sat_variables = static_cast<std::uint64_t>(enc.cnf.num_vars);
    result.stats.sat_clauses = enc.cnf.clauses.size();

    std::optional<std::vector<bool>> model;
    if (options.external_command.empty()) {
      CdclSolver solver(enc.cnf);
      const SatOutcome outcome = solver.solve(&budget);
      result.stats.expansions += solver.propagations();
      if (outcome == SatOutcome::Unknown) {
        result.diagnostic = "budget exhausted";
        return finish(SolveStatus::Timeout);
      }
      if (outcome == SatOutcome::Satisfiable) model = solver.model();
    } else {
      try {
        model = run_external(options.external_command, enc.cnf);
      } catch (const std::exception& e) {
        result.diagnostic = std::string("external SAT solver failed: ") + e.what();
        return finish(SolveStatus::Timeout);
      }
      if (model && !satisfies(enc.cnf, *model)) {
        result.diagnostic = "external SAT solver returned a non-model";
        return finish(SolveStatus::Timeout);
      }
    }
    if (model) {
      result.paths = decode_sat(enc, *model);
      result.sum_of_costs = 0;
      for (const auto& p : result.paths) result.sum_of_costs += p.cost();
      if (!find_conflicts(result.paths, true).empty() || result.sum_of_costs > bound) {
        result.diagnostic = "decoded solution violates the encoding";
        return finish(SolveStatus::Error);
      }
      return finish(SolveStatus::Solved);
    }
  }
  result.diagnostic = "no solution up to cost bound " + std::to_string(limit);
  return finish(SolveStatus::Infeasible);
}

SolveResult solve_sat(const MapfInstance& instance, double budget_seconds, ClockKind clock,
                      const SatOptions& options) {
  Budget budget(budget_seconds, clock);
  return run_sat(instance, budget, options);
}

}  // namespace mapfast
