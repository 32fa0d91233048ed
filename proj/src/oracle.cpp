#include "mapfast/oracle.hpp"

#include <bit>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include "mapfast/pathfinding.hpp"

namespace mapfast {

namespace {

struct JointNode {
  std::uint64_t key;
  int parent;
  int g;
};

struct OpenItem {
  int f;
  int g;
  std::uint64_t seq;
  int node;
  bool operator>(const OpenItem& o) const {
    if (f != o.f) return f > o.f;
    if (g != o.g) return g < o.g;
    return seq > o.seq;
  }
};

class JointSearch {
 public:
  JointSearch(const MapfInstance& instance, Budget& budget) : inst_(instance), budget_(budget) {
    n_ = instance.agent_count();
    const auto cells = static_cast<std::uint64_t>(instance.map.cell_count());
    bits_ = std::max(1, static_cast<int>(std::bit_width(cells)));
    if (n_ * (bits_ + 1) > 64) throw std::invalid_argument("instance too large for the joint-state oracle");
    for (const auto& a : instance.agents) {
      fields_.push_back(distance_field(instance.map, a.goal));
      goals_.push_back(instance.map.index(a.goal));
    }
  }

  SolveResult run() {
    SolveResult result;
    auto finish = [&](SolveStatus s) {
      result.status = s;
      result.runtime_seconds = s == SolveStatus::Timeout ? budget_.limit() : budget_.elapsed();
      result.stats.work = budget_.work();
      return result;
    };
    if (budget_.expired()) return finish(SolveStatus::Timeout);

    std::vector<int> pos(n_);
    std::vector<char> done(n_, 0);
    for (int i = 0; i < n_; ++i) {
      pos[i] = inst_.map.index(inst_.agents[i].start);
      if (fields_[i].at(pos[i]) == DistanceField::kUnreachable) {
        result.diagnostic = "agent " + std::to_string(i) + " cannot reach its goal";
        return finish(SolveStatus::Infeasible);
      }
    }
    const std::uint64_t root = pack(pos, done);
    nodes_.push_back({root, -1, 0});
    best_g_[root] = 0;
    open_.push({heuristic(pos, done), 0, seq_++, 0});

    std::vector<int> next_pos(n_);
    std::vector<char> next_done(n_);
    while (!open_.empty()) {
      if (budget_.expired()) {
        result.diagnostic = "budget exhausted";
        return finish(SolveStatus::Timeout);
      }
      const OpenItem item = open_.top();
      open_.pop();
      const JointNode node = nodes_[item.node];
      if (best_g_[node.key] < node.g) continue;  // stale entry
      ++result.stats.expansions;
      unpack(node.key, pos, done);
      bool all_done = true;
      for (int i = 0; i < n_; ++i) all_done &= done[i] != 0;
      if (all_done) {
        result.paths = reconstruct(item.node);
        result.sum_of_costs = node.g;
        return finish(SolveStatus::Solved);
      }
      current_ = item.node;
      generated_ = 0;
      expand(0, pos, done, next_pos, next_done, node.g);
      budget_.charge(1 + generated_);
    }
    result.diagnostic = "joint state space exhausted";
    return finish(SolveStatus::Infeasible);
  }

 private:
  std::uint64_t pack(const std::vector<int>& pos, const std::vector<char>& done) const {
    std::uint64_t key = 0;
    for (int i = 0; i < n_; ++i) {
      key = (key << (bits_ + 1)) | (static_cast<std::uint64_t>(pos[i]) << 1) | static_cast<std::uint64_t>(done[i]);
    }
    return key;
  }

  void unpack(std::uint64_t key, std::vector<int>& pos, std::vector<char>& done) const {
    const std::uint64_t mask = (std::uint64_t{1} << bits_) - 1;
    for (int i = n_ - 1; i >= 0; --i) {
      done[i] = static_cast<char>(key & 1);
      pos[i] = static_cast<int>((key >> 1) & mask);
      key >>= bits_ + 1;
    }
  }

  int heuristic(const std::vector<int>& pos, const std::vector<char>& done) const {
    int h = 0;
    for (int i = 0; i < n_; ++i) {
      if (!done[i]) h += fields_[i].at(pos[i]);
    }
    return h;
  }

  // Enumerates joint moves agent by agent, rejecting vertex and swap
  // conflicts against agents already placed.
  void expand(int i, const std::vector<int>& pos, const std::vector<char>& done, std::vector<int>& np,
              std::vector<char>& nd, int g) {
    if (i == n_) {
      int cost = 0;
      for (int k = 0; k < n_; ++k) cost += nd[k] ? 0 : 1;
      const std::uint64_t key = pack(np, nd);
      const int ng = g + cost;
      auto it = best_g_.find(key);
      ++generated_;
      if (it != best_g_.end() && it->second <= ng) return;
      best_g_[key] = ng;
      nodes_.push_back({key, current_, ng});
      open_.push({ng + heuristic(np, nd), ng, seq_++, static_cast<int>(nodes_.size()) - 1});
      return;
    }
    auto fits = [&](int cell) {
      for (int j = 0; j < i; ++j) {
        if (np[j] == cell) return false;
        if (np[j] == pos[i] && cell == pos[j] && cell != pos[i]) return false;
      }
      return true;
    };
    if (done[i]) {
      if (fits(pos[i])) {
        np[i] = pos[i];
        nd[i] = 1;
        expand(i + 1, pos, done, np, nd, g);
      }
      return;
    }
    int succ[5];
    int m = inst_.map.neighbors(pos[i], succ);
    succ[m++] = pos[i];
    for (int k = 0; k < m; ++k) {
      if (fields_[i].at(succ[k]) == DistanceField::kUnreachable || !fits(succ[k])) continue;
      np[i] = succ[k];
      nd[i] = 0;
      expand(i + 1, pos, done, np, nd, g);
    }
    if (pos[i] == goals_[i] && fits(pos[i])) {
      np[i] = pos[i];
      nd[i] = 1;
      expand(i + 1, pos, done, np, nd, g);
    }
  }

  std::vector<Path> reconstruct(int node) const {
    std::vector<std::uint64_t> keys;
    for (int i = node; i >= 0; i = nodes_[i].parent) keys.push_back(nodes_[i].key);
    std::vector<Path> paths(n_);
    std::vector<int> pos(n_);
    std::vector<char> done(n_);
    for (auto it = keys.rbegin(); it != keys.rend(); ++it) {
      unpack(*it, pos, done);
      for (int i = 0; i < n_; ++i) paths[i].cells.push_back(inst_.map.coord(pos[i]));
    }
    for (auto& p : paths) {
      while (p.cells.size() > 1 && p.cells[p.cells.size() - 2] == p.cells.back()) p.cells.pop_back();
    }
    return paths;
  }

  const MapfInstance& inst_;
  Budget& budget_;
  int n_ = 0;
  int bits_ = 0;
  std::vector<DistanceField> fields_;
  std::vector<int> goals_;
  std::vector<JointNode> nodes_;
  std::unordered_map<std::uint64_t, int> best_g_;
  std::priority_queue<OpenItem, std::vector<OpenItem>, std::greater<>> open_;
  std::uint64_t seq_ = 0;
  int current_ = 0;
  std::uint64_t generated_ = 0;
};

}  // namespace

SolveResult run_joint_state_oracle(const MapfInstance& instance, Budget& budget) {
  check_well_formed(instance);
  JointSearch search(instance, budget);
  return search.run();
}

SolveResult joint_state_oracle(const MapfInstance& instance, double budget_seconds, ClockKind clock) {
  Budget budget(budget_seconds, clock);
  return run_joint_state_oracle(instance, budget);
}

}  // namespace mapfast
