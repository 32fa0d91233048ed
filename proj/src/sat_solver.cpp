#include "mapfast/sat_solver.hpp"

#include <algorithm>
#include <cstdlib>

namespace mapfast {

namespace {

// Luby sequence 1,1,2,1,1,2,4,...
double luby(double y, int x) {
  int size = 1;
  int seq = 0;
  while (size < x + 1) {
    ++seq;
    size = 2 * size + 1;
  }
  while (size - 1 != x) {
    size = (size - 1) >> 1;
    --seq;
    x = x % size;
  }
  double r = 1.0;
  for (int i = 0; i < seq; ++i) r *= y;
  return r;
}

}  // namespace

CdclSolver::CdclSolver(const Cnf& cnf) : num_vars_(cnf.num_vars) {
  watches_.resize(2 * static_cast<std::size_t>(num_vars_));
  assigns_.assign(num_vars_, -1);
  levels_.assign(num_vars_, 0);
  reasons_.assign(num_vars_, -1);
  phase_.assign(num_vars_, 1);  // prefer false
  activity_.assign(num_vars_, 0.0);
  heap_pos_.assign(num_vars_, -1);
  seen_.assign(num_vars_, 0);
  for (int v = 0; v < num_vars_; ++v) heap_insert(v);
  for (const auto& clause : cnf.clauses) {
    std::vector<Lit> lits;
    lits.reserve(clause.size());
    for (int l : clause) lits.push_back(from_dimacs(l));
    if (!add_clause(std::move(lits))) {
      inconsistent_ = true;
      break;
    }
  }
}

bool CdclSolver::add_clause(std::vector<Lit> lits) {
  std::sort(lits.begin(), lits.end());
  lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
  for (std::size_t i = 1; i < lits.size(); ++i) {
    if (lits[i] == neg(lits[i - 1])) return true;  // tautology
  }
  // Drop literals already false at level 0; satisfied clauses are skipped.
  std::vector<Lit> kept;
  for (Lit l : lits) {
    const int v = value(l);
    if (v == 1) return true;
    if (v == -1) kept.push_back(l);
  }
  if (kept.empty()) return false;
  if (kept.size() == 1) {
    assign(kept[0], -1);
    return propagate() < 0;
  }
  const int id = static_cast<int>(clauses_.size());
  watches_[kept[0]].push_back(id);
  watches_[kept[1]].push_back(id);
  clauses_.push_back(std::move(kept));
  return true;
}

void CdclSolver::assign(Lit l, int reason) {
  const int v = var(l);
  assigns_[v] = (l & 1) ? 0 : 1;
  levels_[v] = level();
  reasons_[v] = reason;
  trail_.push_back(l);
}

// Returns the conflicting clause id or -1.
int CdclSolver::propagate() {
  while (qhead_ < trail_.size()) {
    const Lit p = trail_[qhead_++];
    const Lit false_lit = neg(p);
    ++propagations_;
    auto& ws = watches_[false_lit];
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < ws.size()) {
      const int cid = ws[i++];
      auto& c = clauses_[cid];
      if (c[0] == false_lit) std::swap(c[0], c[1]);
      if (value(c[0]) == 1) {
        ws[j++] = cid;
        continue;
      }
      bool moved = false;
      for (std::size_t k = 2; k < c.size(); ++k) {
        if (value(c[k]) != 0) {
          std::swap(c[1], c[k]);
          watches_[c[1]].push_back(cid);
          moved = true;
          break;
        }
      }
      if (moved) continue;
      ws[j++] = cid;
      if (value(c[0]) == 0) {
        while (i < ws.size()) ws[j++] = ws[i++];
        ws.resize(j);
        qhead_ = trail_.size();
        return cid;
      }
      assign(c[0], cid);
    }
    ws.resize(j);
  }
  return -1;
}

void CdclSolver::analyze(int conflict, std::vector<Lit>& learnt, int& backtrack_level) {
  learnt.assign(1, 0);
  int pending = 0;
  Lit p = -1;
  int index = static_cast<int>(trail_.size()) - 1;
  int cid = conflict;
  do {
    const auto& c = clauses_[cid];
    for (std::size_t k = (p == -1 ? 0 : 1); k < c.size(); ++k) {
      const Lit q = c[k];
      const int v = var(q);
      if (!seen_[v] && levels_[v] > 0) {
        seen_[v] = 1;
        bump(v);
        if (levels_[v] >= level()) {
          ++pending;
        } else {
          learnt.push_back(q);
        }
      }
    }
    while (!seen_[var(trail_[index])]) --index;
    p = trail_[index--];
    cid = reasons_[var(p)];
    seen_[var(p)] = 0;
    --pending;
  } while (pending > 0);
  learnt[0] = neg(p);

  backtrack_level = 0;
  if (learnt.size() > 1) {
    std::size_t max_i = 1;
    for (std::size_t k = 2; k < learnt.size(); ++k) {
      if (levels_[var(learnt[k])] > levels_[var(learnt[max_i])]) max_i = k;
    }
    std::swap(learnt[1], learnt[max_i]);
    backtrack_level = levels_[var(learnt[1])];
  }
  for (Lit l : learnt) seen_[var(l)] = 0;
}

void CdclSolver::backtrack(int target) {
  if (level() <= target) return;
  for (int i = static_cast<int>(trail_.size()) - 1; i >= trail_lim_[target]; --i) {
    const int v = var(trail_[i]);
    phase_[v] = static_cast<char>(trail_[i] & 1);
    assigns_[v] = -1;
    reasons_[v] = -1;
    if (heap_pos_[v] < 0) heap_insert(v);
  }
  trail_.resize(trail_lim_[target]);
  trail_lim_.resize(target);
  qhead_ = trail_.size();
}

int CdclSolver::pick_branch() {
  while (!heap_.empty()) {
    const int v = heap_pop();
    if (assigns_[v] < 0) return v;
  }
  return -1;
}

void CdclSolver::bump(int v) {
  activity_[v] += bump_amount_;
  if (activity_[v] > 1e100) {
    for (double& a : activity_) a *= 1e-100;
    bump_amount_ *= 1e-100;
  }
  if (heap_pos_[v] >= 0) heap_up(heap_pos_[v]);
}

void CdclSolver::heap_insert(int v) {
  heap_pos_[v] = static_cast<int>(heap_.size());
  heap_.push_back(v);
  heap_up(heap_pos_[v]);
}

// Max-heap on activity; lower variable index wins ties.
void CdclSolver::heap_up(int i) {
  const int v = heap_[i];
  auto better = [&](int a, int b) { return activity_[a] > activity_[b] || (activity_[a] == activity_[b] && a < b); };
  while (i > 0) {
    const int parent = (i - 1) / 2;
    if (!better(v, heap_[parent])) break;
    heap_[i] = heap_[parent];
    heap_pos_[heap_[i]] = i;
    i = parent;
  }
  heap_[i] = v;
  heap_pos_[v] = i;
}

void CdclSolver::heap_down(int i) {
  const int v = heap_[i];
  const int n = static_cast<int>(heap_.size());
  auto better = [&](int a, int b) { return activity_[a] > activity_[b] || (activity_[a] == activity_[b] && a < b); };
  while (true) {
    int child = 2 * i + 1;
    if (child >= n) break;
    if (child + 1 < n && better(heap_[child + 1], heap_[child])) ++child;
    if (!better(heap_[child], v)) break;
    heap_[i] = heap_[child];
    heap_pos_[heap_[i]] = i;
    i = child;
  }
  heap_[i] = v;
  heap_pos_[v] = i;
}

int CdclSolver::heap_pop() {
  const int top = heap_[0];
  heap_pos_[top] = -1;
  const int last = heap_.back();
  heap_.pop_back();
  if (!heap_.empty()) {
    heap_[0] = last;
    heap_pos_[last] = 0;
    heap_down(0);
  }
  return top;
}

SatOutcome CdclSolver::solve(Budget* budget) {
  if (inconsistent_) return SatOutcome::Unsatisfiable;
  if (propagate() >= 0) return SatOutcome::Unsatisfiable;
  std::vector<Lit> learnt;
  int restart_index = 0;
  std::uint64_t last_charged = propagations_;
  while (true) {
    const double restart_limit = 64 * luby(2.0, restart_index++);
    int conflicts_this_run = 0;
    while (true) {
      if (budget) {
        budget->charge(propagations_ - last_charged);
        last_charged = propagations_;
        if (budget->expired()) {
          backtrack(0);
          return SatOutcome::Unknown;
        }
      }
      const int conflict = propagate();
      if (conflict >= 0) {
        ++conflicts_;
        ++conflicts_this_run;
        if (level() == 0) return SatOutcome::Unsatisfiable;
        int bt = 0;
        analyze(conflict, learnt, bt);
        backtrack(bt);
        if (learnt.size() == 1) {
          assign(learnt[0], -1);
        } else {
          const int id = static_cast<int>(clauses_.size());
          clauses_.push_back(learnt);
          watches_[learnt[0]].push_back(id);
          watches_[learnt[1]].push_back(id);
          assign(learnt[0], id);
        }
        bump_amount_ /= 0.95;
        continue;
      }
      if (conflicts_this_run >= restart_limit) {
        backtrack(0);
        break;
      }
      const int v = pick_branch();
      if (v < 0) return SatOutcome::Satisfiable;
      trail_lim_.push_back(static_cast<int>(trail_.size()));
      assign(2 * v + phase_[v], -1);
    }
  }
}

std::vector<bool> CdclSolver::model() const {
  std::vector<bool> m(num_vars_ + 1, false);
  for (int v = 0; v < num_vars_; ++v) m[v + 1] = assigns_[v] == 1;
  return m;
}

}  // namespace mapfast
