#include "mapfast/cbs.hpp"

#include <algorithm>
#include <memory>
#include <optional>

#include "mapfast/mdd.hpp"

namespace mapfast {

namespace {

struct CtNode {
  std::vector<Constraint> constraints;
  std::vector<Path> paths;
  std::vector<std::shared_ptr<const Mdd>> mdds;
  int cost = 0;
  int h = 0;
  std::uint64_t seq = 0;
  std::optional<ConflictRecord> conflict;
};

class CbsSearch {
 public:
  CbsSearch(const MapfInstance& instance, Budget& budget, const CbsOptions& options)
      : instance_(instance), budget_(budget), options_(options) {
    for (const auto& a : instance.agents) fields_.push_back(distance_field(instance.map, a.goal));
  }

  SolveResult run() {
    SolveResult result;
    check_well_formed(instance_);
    if (budget_.expired()) return timeout(result);

    auto root = std::make_unique<CtNode>();
    for (const auto& a : instance_.agents) {
      if (!fields_[a.id].reachable(a.start)) {
        result.status = SolveStatus::Infeasible;
        result.diagnostic = "agent " + std::to_string(a.id) + " cannot reach its goal";
        return finish(result);
      }
      root->paths.push_back(shortest_path(instance_.map, a.start, fields_[a.id]));
      root->cost += root->paths.back().cost();
    }
    root->mdds.resize(instance_.agents.size());
    evaluate(*root);
    push(std::move(root));

    while (!open_.empty()) {
      if (budget_.expired()) return timeout(result);
      std::pop_heap(open_.begin(), open_.end(), Later{});
      std::unique_ptr<CtNode> node = std::move(open_.back());
      open_.pop_back();
      ++result.stats.high_level_nodes;
      budget_.charge(1);
      if (options_.on_expand) options_.on_expand(node->cost, node->h);

      if (!node->conflict) {
        result.status = SolveStatus::Solved;
        result.paths = std::move(node->paths);
        result.sum_of_costs = node->cost;
        return finish(result);
      }
      const ConflictRecord c = *node->conflict;
      for (int side = 0; side < 2; ++side) {
        auto child = std::make_unique<CtNode>();
        child->constraints = node->constraints;
        child->paths = node->paths;
        child->mdds = node->mdds;
        child->cost = node->cost;
        const int agent = side == 0 ? c.first : c.second;
        if (c.kind == ConflictKind::Vertex) {
          child->constraints.push_back(Constraint::vertex(agent, c.from, c.time));
        } else if (side == 0) {
          child->constraints.push_back(Constraint::edge(agent, c.from, c.to, c.time));
        } else {
          child->constraints.push_back(Constraint::edge(agent, c.to, c.from, c.time));
        }
        if (!replan(*child, agent)) continue;
        evaluate(*child);
        push(std::move(child));
      }
    }
    result.status = SolveStatus::Infeasible;
    result.diagnostic = "constraint tree exhausted";
    return finish(result);
  }

  // For the root-heuristic probe.
  int root_h() {
    CtNode root;
    for (const auto& a : instance_.agents) {
      root.paths.push_back(shortest_path(instance_.map, a.start, fields_[a.id]));
      root.cost += root.paths.back().cost();
    }
    root.mdds.resize(instance_.agents.size());
    evaluate(root);
    return root.h;
  }

 private:
  struct Later {
    bool operator()(const std::unique_ptr<CtNode>& a, const std::unique_ptr<CtNode>& b) const {
      const int fa = a->cost + a->h;
      const int fb = b->cost + b->h;
      if (fa != fb) return fa > fb;
      return a->seq > b->seq;
    }
  };

  void push(std::unique_ptr<CtNode> node) {
    node->seq = next_seq_++;
    open_.push_back(std::move(node));
    std::push_heap(open_.begin(), open_.end(), Later{});
  }

  std::vector<Constraint> constraints_for(const CtNode& node, int agent) const {
    std::vector<Constraint> out;
    for (const auto& c : node.constraints) {
      if (c.agent == agent) out.push_back(c);
    }
    return out;
  }

  bool replan(CtNode& node, int agent) {
    const auto mine = constraints_for(node, agent);
    SearchStats stats;
    auto path = spacetime_astar(instance_.map, instance_.agents[agent], mine,
                                default_horizon(instance_.map, mine), &fields_[agent], &stats);
    expansions_ += stats.expansions;
    budget_.charge(stats.expansions);
    if (!path) return false;
    node.cost += path->cost() - node.paths[agent].cost();
    node.paths[agent] = std::move(*path);
    node.mdds[agent].reset();
    return true;
  }

  const Mdd& mdd_for(CtNode& node, int agent) {
    if (!node.mdds[agent]) {
      const auto mine = constraints_for(node, agent);
      auto mdd = std::make_shared<const Mdd>(build_mdd(instance_.map, instance_.agents[agent],
                                                       node.paths[agent].cost(), mine, &fields_[agent]));
      budget_.charge(mdd->node_count());
      node.mdds[agent] = std::move(mdd);
    }
    return *node.mdds[agent];
  }

  bool cardinal_for(CtNode& node, int agent, const ConflictRecord& c) {
    const Mdd& mdd = mdd_for(node, agent);
    if (c.kind == ConflictKind::Vertex) return mdd.is_singleton(c.time, c.from);
    const bool mover_is_first = agent == c.first;
    const Coord from = mover_is_first ? c.from : c.to;
    const Coord to = mover_is_first ? c.to : c.from;
    return mdd.is_singleton(c.time - 1, from) && mdd.is_singleton(c.time, to);
  }

  Cardinality classify(CtNode& node, const ConflictRecord& c) {
    const bool a = cardinal_for(node, c.first, c);
    const bool b = cardinal_for(node, c.second, c);
    if (a && b) return Cardinality::Cardinal;
    if (a || b) return Cardinality::SemiCardinal;
    return Cardinality::NonCardinal;
  }

  void evaluate(CtNode& node) {
    node.h = 0;
    node.conflict.reset();
    if (!options_.cardinal_heuristic) {
      auto first = find_conflicts(node.paths, true);
      if (!first.empty()) node.conflict = first.front();
      return;
    }
    const auto conflicts = find_conflicts(node.paths);
    if (conflicts.empty()) return;
    const std::size_t n = instance_.agents.size();
    std::vector<char> matched(n, 0);
    std::optional<ConflictRecord> semi;
    std::optional<ConflictRecord> cardinal;
    for (const auto& c : conflicts) {
      switch (classify(node, c)) {
        case Cardinality::Cardinal:
          if (!cardinal) cardinal = c;
          if (!matched[c.first] && !matched[c.second]) {
            matched[c.first] = matched[c.second] = 1;
            ++node.h;
          }
          break;
        case Cardinality::SemiCardinal:
          if (!semi) semi = c;
          break;
        case Cardinality::NonCardinal:
          break;
      }
    }
    node.conflict = cardinal ? cardinal : semi ? semi : conflicts.front();
  }

  SolveResult& timeout(SolveResult& result) {
    result.status = SolveStatus::Timeout;
    result.diagnostic = "budget exhausted";
    finish(result);
    result.runtime_seconds = budget_.limit();
    return result;
  }

  SolveResult& finish(SolveResult& result) {
    result.runtime_seconds = budget_.elapsed();
    result.stats.expansions = expansions_;
    result.stats.work = budget_.work();
    return result;
  }

  const MapfInstance& instance_;
  Budget& budget_;
  const CbsOptions& options_;
  std::vector<DistanceField> fields_;
  std::vector<std::unique_ptr<CtNode>> open_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t expansions_ = 0;
};

}  // namespace

SolveResult run_cbs(const MapfInstance& instance, Budget& budget, const CbsOptions& options) {
  CbsSearch search(instance, budget, options);
  return search.run();
}

SolveResult solve_cbs(const MapfInstance& instance, double budget_seconds, ClockKind clock) {
  Budget budget(budget_seconds, clock);
  return run_cbs(instance, budget, CbsOptions{});
}

SolveResult solve_cbsh(const MapfInstance& instance, double budget_seconds, ClockKind clock) {
  Budget budget(budget_seconds, clock);
  CbsOptions options;
  options.cardinal_heuristic = true;
  return run_cbs(instance, budget, options);
}

int cbsh_root_heuristic(const MapfInstance& instance) {
  Budget budget(1e9);
  CbsOptions options;
  options.cardinal_heuristic = true;
  CbsSearch search(instance, budget, options);
  return search.root_h();
}

}  // namespace mapfast
